#include "tsvf/joint_state.hpp"

#include <cmath>

namespace tsvf {

JointState::JointState(BasisPtr sys, BasisPtr probe, std::vector<Amplitude> row_major)
    : sys_(std::move(sys)), probe_(std::move(probe)), m_(std::move(row_major)) {
    if (!sys_ || !probe_) throw structural_error("joint state requires both bases");
    if (m_.size() != sys_->size() * probe_->size()) {
        throw structural_error("joint amplitude table does not match basis sizes");
    }
    for (const auto& v : m_) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw structural_error("non-finite joint amplitude");
        }
    }
}

JointState JointState::tensor(const StateVector& sys, const StateVector& probe) {
    for (const auto& label : probe.basis()->labels()) {
        if (sys.basis()->contains(label)) {
            throw structural_error("system and probe label namespaces collide on '" + label + "'");
        }
    }
    std::size_t np = probe.dim();
    std::vector<Amplitude> m(sys.dim() * np);
    for (std::size_t s = 0; s < sys.dim(); ++s) {
        for (std::size_t p = 0; p < np; ++p) {
            m[s * np + p] = sys[s] * probe[p];
        }
    }
    return JointState(sys.basis(), probe.basis(), std::move(m));
}

double JointState::norm_squared() const {
    double s = 0.0;
    for (const auto& v : m_) s += std::norm(v);
    return s;
}

double JointState::norm() const { return std::sqrt(norm_squared()); }

JointState JointState::apply_system(const Operator& op) const {
    if (!same_basis(op.basis(), sys_)) {
        throw structural_error("system-side operator over a different basis");
    }
    std::size_t ns = sys_->size();
    std::size_t np = probe_->size();
    std::vector<Amplitude> out(ns * np);
    for (std::size_t r = 0; r < ns; ++r) {
        for (std::size_t c = 0; c < ns; ++c) {
            Amplitude v = op.at(r, c);
            if (v == Amplitude{}) continue;
            for (std::size_t p = 0; p < np; ++p) {
                out[r * np + p] += v * m_[c * np + p];
            }
        }
    }
    return JointState(sys_, probe_, std::move(out));
}

JointState JointState::apply_probe(const Operator& op) const {
    if (!same_basis(op.basis(), probe_)) {
        throw structural_error("probe-side operator over a different basis");
    }
    std::size_t ns = sys_->size();
    std::size_t np = probe_->size();
    std::vector<Amplitude> out(ns * np);
    for (std::size_t s = 0; s < ns; ++s) {
        for (std::size_t r = 0; r < np; ++r) {
            Amplitude acc{};
            for (std::size_t q = 0; q < np; ++q) {
                acc += op.at(r, q) * m_[s * np + q];
            }
            out[s * np + r] = acc;
        }
    }
    return JointState(sys_, probe_, std::move(out));
}

JointState JointState::apply_joint(const Operator& op) const {
    StateVector flat = flattened();
    if (op.dim() != flat.dim()) {
        throw structural_error("joint operator dimension does not match product basis");
    }
    // The operator may have been built over its own product basis instance;
    // dimensions matching is the contract here.
    std::size_t n = flat.dim();
    std::vector<Amplitude> out(n);
    for (std::size_t r = 0; r < n; ++r) {
        Amplitude acc{};
        for (std::size_t c = 0; c < n; ++c) {
            acc += op.at(r, c) * flat[c];
        }
        out[r] = acc;
    }
    return JointState(sys_, probe_, std::move(out));
}

StateVector JointState::flattened() const {
    return StateVector(product_basis(sys_, probe_), m_);
}

JointState JointState::from_flat(const StateVector& flat, BasisPtr sys, BasisPtr probe) {
    if (flat.dim() != sys->size() * probe->size()) {
        throw structural_error("flat vector does not reshape to the requested factors");
    }
    return JointState(std::move(sys), std::move(probe), flat.amplitudes());
}

StateVector JointState::conditional_probe(const StateVector& sys_bra) const {
    if (!same_basis(sys_bra.basis(), sys_)) {
        throw structural_error("conditioning bra over a different system basis");
    }
    std::size_t np = probe_->size();
    std::vector<Amplitude> out(np);
    for (std::size_t s = 0; s < sys_->size(); ++s) {
        Amplitude w = std::conj(sys_bra[s]);
        if (w == Amplitude{}) continue;
        for (std::size_t p = 0; p < np; ++p) {
            out[p] += w * m_[s * np + p];
        }
    }
    return StateVector(probe_, std::move(out));
}

JointState tensor(const StateVector& sys, const StateVector& probe) {
    return JointState::tensor(sys, probe);
}

} // namespace tsvf
