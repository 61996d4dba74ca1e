#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fmsync/types.hpp"

namespace fmsync {

/**
 * Linear information dynamics of one agent:
 *
 *   sigma' = S sigma + B chi,   omega = E sigma + omega_c.
 *
 * S is p x p, B is p x m, E is 1 x p.
 */
struct AgentParams {
    SmallMat S;
    SmallMat B;
    SmallRow E;
    double omega_c = 1.0;

    [[nodiscard]] int p() const noexcept { return static_cast<int>(S.rows()); }
    [[nodiscard]] int m() const noexcept { return static_cast<int>(B.cols()); }

    /// Throws DimensionMismatch / Config on inconsistent shapes or omega_c <= 0.
    void validate() const;

    [[nodiscard]] double frequency(const SmallVec& sigma) const { return (E * sigma).value() + omega_c; }
};

/// Optional operating shell alpha_lo <= ||x|| <= alpha_hi.
struct Envelope {
    double lo = 0.0;
    double hi = 0.0;
};

/**
 * Nonlinear carrier x' = f(x) omega + f_o(x).
 *
 * Implementations must be immutable and thread-safe; `jac_f` is df/dx.
 */
class Carrier {
  public:
    virtual ~Carrier() = default;

    [[nodiscard]] virtual std::string name() const = 0;
    [[nodiscard]] virtual int dim() const = 0;
    [[nodiscard]] virtual SmallVec f(const SmallVec& x) const = 0;
    [[nodiscard]] virtual SmallVec f_o(const SmallVec& x) const = 0;
    [[nodiscard]] virtual SmallMat jac_f(const SmallVec& x) const = 0;
    [[nodiscard]] virtual std::optional<Envelope> envelope() const { return std::nullopt; }
};

using CarrierPtr = std::shared_ptr<const Carrier>;

/// f(x) = [[0, 1], [-1, 0]] x, f_o = 0.
class RotationalCarrier final : public Carrier {
  public:
    [[nodiscard]] std::string name() const override { return "rotational"; }
    [[nodiscard]] int dim() const override { return 2; }
    [[nodiscard]] SmallVec f(const SmallVec& x) const override;
    [[nodiscard]] SmallVec f_o(const SmallVec& x) const override;
    [[nodiscard]] SmallMat jac_f(const SmallVec& x) const override;
};

/// Hindmarsh-Rose neuron with x = (v, w, z); the modulated frequency scales the injected current and w.
class HindmarshRoseCarrier final : public Carrier {
  public:
    [[nodiscard]] std::string name() const override { return "hindmarsh_rose"; }
    [[nodiscard]] int dim() const override { return 3; }
    [[nodiscard]] SmallVec f(const SmallVec& x) const override;
    [[nodiscard]] SmallVec f_o(const SmallVec& x) const override;
    [[nodiscard]] SmallMat jac_f(const SmallVec& x) const override;
};

/// Adapter for user-defined carriers assembled from callables.
class FunctionCarrier final : public Carrier {
  public:
    using VecFn = std::function<SmallVec(const SmallVec&)>;
    using JacFn = std::function<SmallMat(const SmallVec&)>;

    FunctionCarrier(std::string name, int dim, VecFn f, VecFn f_o, JacFn jac_f,
                    std::optional<Envelope> envelope = std::nullopt);

    [[nodiscard]] std::string name() const override { return name_; }
    [[nodiscard]] int dim() const override { return dim_; }
    [[nodiscard]] SmallVec f(const SmallVec& x) const override { return f_(x); }
    [[nodiscard]] SmallVec f_o(const SmallVec& x) const override { return f_o_(x); }
    [[nodiscard]] SmallMat jac_f(const SmallVec& x) const override { return jac_(x); }
    [[nodiscard]] std::optional<Envelope> envelope() const override { return envelope_; }

  private:
    std::string name_;
    int dim_;
    VecFn f_;
    VecFn f_o_;
    JacFn jac_;
    std::optional<Envelope> envelope_;
};

[[nodiscard]] CarrierPtr rotational_carrier();
[[nodiscard]] CarrierPtr hindmarsh_rose_carrier();

/// Looks up "rotational", "hindmarsh_rose" or a name added with register_carrier.
[[nodiscard]] CarrierPtr make_carrier(const std::string& name);
void register_carrier(const std::string& name, std::function<CarrierPtr()> factory);
[[nodiscard]] std::vector<std::string> carrier_names();

struct AgentState {
    SmallVec sigma;
    SmallVec x;
};

/// (S sigma + B chi, f(x) (E sigma + omega_c) + f_o(x)).
[[nodiscard]] AgentState agent_derivative(const AgentState& state, const SmallVec& chi, const AgentParams& params,
                                          const Carrier& carrier);

}  // namespace fmsync
