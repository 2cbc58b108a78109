#pragma once

#include "tsvf/state_vector.hpp"

namespace tsvf {

/// Dense square complex matrix over a rail basis. Operators flagged
/// `unitary` satisfy U†U = I and flagged `projector` satisfy P² = P = P†,
/// both verified to kTol when the flag is set.
class Operator {
public:
    Operator(BasisPtr basis, std::vector<Amplitude> row_major);

    static Operator identity(BasisPtr basis);
    static Operator zero(BasisPtr basis);

    const BasisPtr& basis() const { return basis_; }
    std::size_t dim() const { return dim_; }

    Amplitude at(std::size_t row, std::size_t col) const { return m_[row * dim_ + col]; }
    void set(std::size_t row, std::size_t col, Amplitude v) { m_[row * dim_ + col] = v; }
    const std::vector<Amplitude>& entries() const { return m_; }

    /// Verifies the advertised property and records the flag; throws
    /// structural_error if the matrix does not satisfy it to kTol.
    Operator& mark_unitary();
    Operator& mark_projector();
    bool is_flagged_unitary() const { return unitary_; }
    bool is_flagged_projector() const { return projector_; }

    Operator dagger() const;

    friend Operator operator*(const Operator& a, const Operator& b);
    friend Operator operator+(const Operator& a, const Operator& b);
    friend Operator operator-(const Operator& a, const Operator& b);
    friend Operator operator*(Amplitude scale, const Operator& a);

private:
    BasisPtr basis_;
    std::size_t dim_ = 0;
    std::vector<Amplitude> m_;
    bool unitary_ = false;
    bool projector_ = false;
};

/// Matrix–vector product. Preserves norm when op is unitary.
StateVector apply(const Operator& op, const StateVector& s);

/// Rank-1 diagonal projector |rail⟩⟨rail|, flagged projector.
Operator projector_onto(std::string_view rail, const BasisPtr& basis);

/// Basis with labels "<sys>:<probe>", system index major.
BasisPtr product_basis(const BasisPtr& sys, const BasisPtr& probe);

/// Kronecker product over product_basis(sys, probe).
Operator kron(const Operator& sys_op, const Operator& probe_op);

} // namespace tsvf
