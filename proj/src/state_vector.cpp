#include "tsvf/state_vector.hpp"

#include <cmath>

namespace tsvf {

namespace {

void check_finite(const std::vector<Amplitude>& amps) {
    for (const auto& a : amps) {
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
            throw structural_error("non-finite amplitude");
        }
    }
}

} // namespace

StateVector::StateVector(BasisPtr basis, std::vector<Amplitude> amps)
    : basis_(std::move(basis)), amps_(std::move(amps)) {
    if (!basis_) throw structural_error("state vector requires a basis");
    if (amps_.size() != basis_->size()) {
        throw structural_error("amplitude count does not match basis size");
    }
    check_finite(amps_);
}

StateVector StateVector::zero(BasisPtr basis) {
    std::size_t n = basis->size();
    return StateVector(std::move(basis), std::vector<Amplitude>(n));
}

StateVector StateVector::unit(BasisPtr basis, std::string_view rail) {
    std::vector<Amplitude> amps(basis->size());
    amps[basis->index_of(rail)] = Amplitude(1.0, 0.0);
    return StateVector(std::move(basis), std::move(amps));
}

double StateVector::norm_squared() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return s;
}

double StateVector::norm() const { return std::sqrt(norm_squared()); }

StateVector StateVector::normalized() const {
    double n = norm();
    if (n < 1e-300) throw structural_error("cannot normalize a zero vector");
    std::vector<Amplitude> amps(amps_);
    for (auto& a : amps) a /= n;
    return StateVector(basis_, std::move(amps));
}

StateVector StateVector::scaled(Amplitude factor) const {
    std::vector<Amplitude> amps(amps_);
    for (auto& a : amps) a *= factor;
    return StateVector(basis_, std::move(amps));
}

Amplitude inner(const StateVector& bra, const StateVector& ket) {
    if (!same_basis(bra.basis(), ket.basis())) {
        throw structural_error("inner product between mismatched bases");
    }
    Amplitude s{};
    for (std::size_t i = 0; i < bra.dim(); ++i) {
        s += std::conj(bra[i]) * ket[i];
    }
    return s;
}

} // namespace tsvf
