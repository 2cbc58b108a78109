#pragma once

#include "tsvf/basis.hpp"

#include <complex>
#include <vector>

namespace tsvf {

using Amplitude = std::complex<double>;

/// Absolute tolerance for structural checks (unitarity, projector laws,
/// unit-norm boundary states). All data is unit-normalized, so an absolute
/// tolerance is appropriate.
inline constexpr double kTol = 1e-12;

/// Complex amplitude per rail at one time slice. Immutable after
/// construction; safe to share across threads.
class StateVector {
public:
    StateVector() = default;
    StateVector(BasisPtr basis, std::vector<Amplitude> amps);

    static StateVector zero(BasisPtr basis);
    static StateVector unit(BasisPtr basis, std::string_view rail);

    const BasisPtr& basis() const { return basis_; }
    std::size_t dim() const { return amps_.size(); }
    const Amplitude& operator[](std::size_t i) const { return amps_.at(i); }
    Amplitude at(std::string_view rail) const { return amps_.at(basis_->index_of(rail)); }
    const std::vector<Amplitude>& amplitudes() const { return amps_; }

    double norm_squared() const;
    double norm() const;

    StateVector normalized() const;
    StateVector scaled(Amplitude factor) const;

private:
    BasisPtr basis_;
    std::vector<Amplitude> amps_;
};

/// ⟨bra|ket⟩ = Σ conj(bra_i)·ket_i. Bases must be identical.
Amplitude inner(const StateVector& bra, const StateVector& ket);

} // namespace tsvf
