#include "tsvf/operators.hpp"

#include <cmath>

namespace tsvf {

Operator::Operator(BasisPtr basis, std::vector<Amplitude> row_major)
    : basis_(std::move(basis)), m_(std::move(row_major)) {
    if (!basis_) throw structural_error("operator requires a basis");
    dim_ = basis_->size();
    if (m_.size() != dim_ * dim_) {
        throw structural_error("operator matrix does not match basis size");
    }
    for (const auto& v : m_) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw structural_error("non-finite operator entry");
        }
    }
}

Operator Operator::identity(BasisPtr basis) {
    std::size_t n = basis->size();
    std::vector<Amplitude> m(n * n);
    for (std::size_t i = 0; i < n; ++i) m[i * n + i] = 1.0;
    return Operator(std::move(basis), std::move(m));
}

Operator Operator::zero(BasisPtr basis) {
    std::size_t n = basis->size();
    return Operator(std::move(basis), std::vector<Amplitude>(n * n));
}

namespace {

double max_deviation(const Operator& a, const Operator& b) {
    double worst = 0.0;
    for (std::size_t r = 0; r < a.dim(); ++r) {
        for (std::size_t c = 0; c < a.dim(); ++c) {
            worst = std::max(worst, std::abs(a.at(r, c) - b.at(r, c)));
        }
    }
    return worst;
}

} // namespace

Operator& Operator::mark_unitary() {
    Operator product = dagger() * *this;
    double dev = max_deviation(product, Operator::identity(basis_));
    if (dev > kTol) {
        throw structural_error("operator flagged unitary violates U†U = I (deviation " +
                               std::to_string(dev) + ")");
    }
    unitary_ = true;
    return *this;
}

Operator& Operator::mark_projector() {
    double dev = std::max(max_deviation(*this * *this, *this), max_deviation(dagger(), *this));
    if (dev > kTol) {
        throw structural_error("operator flagged projector violates P² = P = P†");
    }
    projector_ = true;
    return *this;
}

Operator Operator::dagger() const {
    std::vector<Amplitude> m(dim_ * dim_);
    for (std::size_t r = 0; r < dim_; ++r) {
        for (std::size_t c = 0; c < dim_; ++c) {
            m[c * dim_ + r] = std::conj(at(r, c));
        }
    }
    return Operator(basis_, std::move(m));
}

Operator operator*(const Operator& a, const Operator& b) {
    if (!same_basis(a.basis_, b.basis_)) throw structural_error("operator product over mismatched bases");
    std::size_t n = a.dim_;
    std::vector<Amplitude> m(n * n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = 0; k < n; ++k) {
            Amplitude ark = a.at(r, k);
            if (ark == Amplitude{}) continue;
            for (std::size_t c = 0; c < n; ++c) {
                m[r * n + c] += ark * b.at(k, c);
            }
        }
    }
    return Operator(a.basis_, std::move(m));
}

Operator operator+(const Operator& a, const Operator& b) {
    if (!same_basis(a.basis_, b.basis_)) throw structural_error("operator sum over mismatched bases");
    std::vector<Amplitude> m(a.m_);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += b.m_[i];
    return Operator(a.basis_, std::move(m));
}

Operator operator-(const Operator& a, const Operator& b) {
    if (!same_basis(a.basis_, b.basis_)) throw structural_error("operator difference over mismatched bases");
    std::vector<Amplitude> m(a.m_);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] -= b.m_[i];
    return Operator(a.basis_, std::move(m));
}

Operator operator*(Amplitude scale, const Operator& a) {
    std::vector<Amplitude> m(a.m_);
    for (auto& v : m) v *= scale;
    return Operator(a.basis_, std::move(m));
}

StateVector apply(const Operator& op, const StateVector& s) {
    if (!same_basis(op.basis(), s.basis())) {
        throw structural_error("operator applied to state over a different basis");
    }
    std::size_t n = op.dim();
    std::vector<Amplitude> out(n);
    for (std::size_t r = 0; r < n; ++r) {
        Amplitude acc{};
        for (std::size_t c = 0; c < n; ++c) {
            acc += op.at(r, c) * s[c];
        }
        out[r] = acc;
    }
    return StateVector(s.basis(), std::move(out));
}

Operator projector_onto(std::string_view rail, const BasisPtr& basis) {
    std::size_t i = basis->index_of(rail);
    Operator p = Operator::zero(basis);
    p.set(i, i, 1.0);
    p.mark_projector();
    return p;
}

BasisPtr product_basis(const BasisPtr& sys, const BasisPtr& probe) {
    std::vector<std::string> labels;
    labels.reserve(sys->size() * probe->size());
    for (const auto& s : sys->labels()) {
        for (const auto& p : probe->labels()) {
            labels.push_back(s + ":" + p);
        }
    }
    return make_basis(std::move(labels));
}

Operator kron(const Operator& sys_op, const Operator& probe_op) {
    BasisPtr joint = product_basis(sys_op.basis(), probe_op.basis());
    std::size_t ns = sys_op.dim();
    std::size_t np = probe_op.dim();
    std::size_t n = ns * np;
    std::vector<Amplitude> m(n * n);
    for (std::size_t sr = 0; sr < ns; ++sr) {
        for (std::size_t sc = 0; sc < ns; ++sc) {
            Amplitude sv = sys_op.at(sr, sc);
            if (sv == Amplitude{}) continue;
            for (std::size_t pr = 0; pr < np; ++pr) {
                for (std::size_t pc = 0; pc < np; ++pc) {
                    m[(sr * np + pr) * n + (sc * np + pc)] = sv * probe_op.at(pr, pc);
                }
            }
        }
    }
    return Operator(std::move(joint), std::move(m));
}

} // namespace tsvf
