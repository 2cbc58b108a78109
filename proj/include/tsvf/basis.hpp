#pragma once

#include "tsvf/errors.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tsvf {

/// Ordered set of rail labels. Declaration order is fixed and semantic:
/// amplitude vectors and operator matrices index into it.
class Basis {
public:
    explicit Basis(std::vector<std::string> labels) : labels_(std::move(labels)) {
        if (labels_.empty()) {
            throw structural_error("basis must contain at least one rail");
        }
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (labels_[i].empty()) {
                throw structural_error("empty rail label");
            }
            auto [it, inserted] = index_.emplace(labels_[i], i);
            if (!inserted) {
                throw structural_error("duplicate rail label '" + labels_[i] + "'");
            }
        }
    }

    std::size_t size() const { return labels_.size(); }
    const std::string& label(std::size_t i) const { return labels_.at(i); }
    const std::vector<std::string>& labels() const { return labels_; }

    std::optional<std::size_t> find(std::string_view rail) const {
        auto it = index_.find(std::string(rail));
        return it == index_.end() ? std::nullopt : std::optional<std::size_t>(it->second);
    }

    std::size_t index_of(std::string_view rail) const {
        if (auto i = find(rail)) return *i;
        throw structural_error("unknown rail '" + std::string(rail) + "'");
    }

    bool contains(std::string_view rail) const { return find(rail).has_value(); }

    friend bool operator==(const Basis& a, const Basis& b) { return a.labels_ == b.labels_; }
    friend bool operator!=(const Basis& a, const Basis& b) { return !(a == b); }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, std::size_t> index_;
};

using BasisPtr = std::shared_ptr<const Basis>;

inline BasisPtr make_basis(std::vector<std::string> labels) {
    return std::make_shared<const Basis>(std::move(labels));
}

inline bool same_basis(const BasisPtr& a, const BasisPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return *a == *b;
}

} // namespace tsvf
