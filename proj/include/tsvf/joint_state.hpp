#pragma once

#include "tsvf/operators.hpp"

namespace tsvf {

/// Tensor-product state of one system photon and one probe photon, stored
/// as a complex matrix of joint amplitudes (rows = system rails, columns =
/// probe rails). Reshaping to and from the flat product-basis vector is
/// lossless.
class JointState {
public:
    JointState(BasisPtr sys, BasisPtr probe, std::vector<Amplitude> row_major);

    /// Joint amplitudes are products sys_i · probe_j. The two label
    /// namespaces must be disjoint.
    static JointState tensor(const StateVector& sys, const StateVector& probe);

    const BasisPtr& system_basis() const { return sys_; }
    const BasisPtr& probe_basis() const { return probe_; }
    std::size_t system_dim() const { return sys_->size(); }
    std::size_t probe_dim() const { return probe_->size(); }

    Amplitude at(std::size_t s, std::size_t p) const { return m_[s * probe_->size() + p]; }
    const std::vector<Amplitude>& entries() const { return m_; }

    double norm_squared() const;
    double norm() const;

    /// Acts on the designated factor only; the other factor is untouched.
    JointState apply_system(const Operator& op) const;
    JointState apply_probe(const Operator& op) const;

    /// Applies an operator over the full product basis via the flat view.
    JointState apply_joint(const Operator& op) const;

    StateVector flattened() const;
    static JointState from_flat(const StateVector& flat, BasisPtr sys, BasisPtr probe);

    /// Probe-side amplitudes conditioned on a system bra:
    /// result_p = Σ_s conj(bra_s) · J[s][p]. Not renormalized.
    StateVector conditional_probe(const StateVector& sys_bra) const;

private:
    BasisPtr sys_;
    BasisPtr probe_;
    std::vector<Amplitude> m_;
};

/// Free-function form of JointState::tensor.
JointState tensor(const StateVector& sys, const StateVector& probe);

} // namespace tsvf
