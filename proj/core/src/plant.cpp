#include "fmsync/plant.hpp"

#include <map>
#include <mutex>
#include <sstream>

#include "fmsync/errors.hpp"

namespace fmsync {

void AgentParams::validate() const {
    const int p_dim = p();
    if (p_dim == 0 || S.cols() != p_dim) {
        throw Error(ErrorKind::DimensionMismatch, "S must be a nonempty square matrix");
    }
    if (B.rows() != p_dim || B.cols() == 0) {
        throw Error(ErrorKind::DimensionMismatch, "B must have p rows and at least one column");
    }
    if (E.cols() != p_dim) {
        throw Error(ErrorKind::DimensionMismatch, "E must be 1 x p");
    }
    if (!(omega_c > 0.0)) {
        throw Error(ErrorKind::Config, "omega_c must be positive");
    }
}

SmallVec RotationalCarrier::f(const SmallVec& x) const {
    SmallVec out(2);
    out << x(1), -x(0);
    return out;
}

SmallVec RotationalCarrier::f_o(const SmallVec& x) const { return SmallVec::Zero(x.size()); }

SmallMat RotationalCarrier::jac_f(const SmallVec&) const {
    SmallMat j(2, 2);
    j << 0.0, 1.0, -1.0, 0.0;
    return j;
}

SmallVec HindmarshRoseCarrier::f(const SmallVec& x) const {
    const double v = x(0);
    const double w = x(1);
    SmallVec out(3);
    out << 2.0, -5.0 * v * v - w + 1.0, 0.0;
    return out;
}

SmallVec HindmarshRoseCarrier::f_o(const SmallVec& x) const {
    const double v = x(0);
    const double w = x(1);
    const double z = x(2);
    SmallVec out(3);
    out << 3.0 * v * v - v * v * v + w - z, 0.0, 0.005 * (4.0 * (v + 1.5) - z);
    return out;
}

SmallMat HindmarshRoseCarrier::jac_f(const SmallVec& x) const {
    SmallMat j = SmallMat::Zero(3, 3);
    j(1, 0) = -10.0 * x(0);
    j(1, 1) = -1.0;
    return j;
}

FunctionCarrier::FunctionCarrier(std::string name, int dim, VecFn f, VecFn f_o, JacFn jac_f,
                                 std::optional<Envelope> envelope)
    : name_(std::move(name)),
      dim_(dim),
      f_(std::move(f)),
      f_o_(std::move(f_o)),
      jac_(std::move(jac_f)),
      envelope_(envelope) {
    if (dim_ <= 0 || dim_ > kMaxDim) {
        std::ostringstream os;
        os << "carrier dimension must be in 1.." << kMaxDim;
        throw Error(ErrorKind::DimensionMismatch, os.str());
    }
    if (!f_ || !f_o_ || !jac_) {
        throw Error(ErrorKind::Config, "carrier '" + name_ + "' is missing a callable");
    }
}

CarrierPtr rotational_carrier() {
    static const CarrierPtr instance = std::make_shared<RotationalCarrier>();
    return instance;
}

CarrierPtr hindmarsh_rose_carrier() {
    static const CarrierPtr instance = std::make_shared<HindmarshRoseCarrier>();
    return instance;
}

namespace {

struct Registry {
    std::mutex mutex;
    std::map<std::string, std::function<CarrierPtr()>> factories{
        {"rotational", rotational_carrier},
        {"hindmarsh_rose", hindmarsh_rose_carrier},
    };
};

Registry& registry() {
    static Registry r;
    return r;
}

}  // namespace

CarrierPtr make_carrier(const std::string& name) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    const auto it = r.factories.find(name);
    if (it == r.factories.end()) {
        throw Error(ErrorKind::Config, "unknown carrier '" + name + "'");
    }
    return it->second();
}

void register_carrier(const std::string& name, std::function<CarrierPtr()> factory) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    r.factories[name] = std::move(factory);
}

std::vector<std::string> carrier_names() {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    std::vector<std::string> names;
    for (const auto& [name, factory] : r.factories) names.push_back(name);
    return names;
}

AgentState agent_derivative(const AgentState& state, const SmallVec& chi, const AgentParams& params,
                            const Carrier& carrier) {
    if (state.sigma.size() != params.p() || chi.size() != params.m() || state.x.size() != carrier.dim()) {
        std::ostringstream os;
        os << "agent_derivative: sigma " << state.sigma.size() << " (p=" << params.p() << "), chi " << chi.size()
           << " (m=" << params.m() << "), x " << state.x.size() << " (q=" << carrier.dim() << ")";
        throw Error(ErrorKind::DimensionMismatch, os.str());
    }
    AgentState d;
    d.sigma = params.S * state.sigma + params.B * chi;
    d.x = carrier.f(state.x) * params.frequency(state.sigma) + carrier.f_o(state.x);
    return d;
}

}  // namespace fmsync
