#include "qrvol/registry.hpp"

#include <algorithm>
#include <stdexcept>

namespace qrvol {

const std::vector<IVEntry>& iv_registry() {
    static const std::vector<IVEntry> r = {
        {"iv.rv", "Realized variance", iv_realized},
        {"iv.bc", "Bias-corrected", iv_bias_corrected},
        {"iv.fourier", "Fourier", iv_fourier},
        {"iv.mle", "Maximum likelihood", iv_mle},
        {"iv.two_scale", "Two-scale", iv_two_scale},
        {"iv.multi_scale", "Multi-scale", iv_multi_scale},
        {"iv.kernel", "Realized kernel", iv_kernel},
        {"iv.preavg", "Pre-averaging", iv_preaveraging},
        {"iv.alternation", "Alternation", iv_alternation},
        {"iv.range", "Realized range", iv_range},
        {"iv.unified", "Unified", iv_unified},
    };
    return r;
}

const std::vector<SpotEntry>& spot_registry() {
    static const std::vector<SpotEntry> r = {
        {"spot.fourier", "Fourier", spot_fourier},
        {"spot.regularized", "Regularized", spot_regularized},
        {"spot.kernel", "Kernel", spot_kernel},
        {"spot.preavg", "Pre-averaging", spot_preaveraging},
        {"spot.two_scale", "Two-scale", spot_two_scale},
        {"spot.preavg_kernel", "Pre-averaging kernel", spot_preavg_kernel},
    };
    return r;
}

const IVEntry* find_iv(const std::string& id) {
    for (const auto& e : iv_registry())
        if (e.id == id) return &e;
    return nullptr;
}

const SpotEntry* find_spot(const std::string& id) {
    for (const auto& e : spot_registry())
        if (e.id == id) return &e;
    return nullptr;
}

bool glob_match(const std::string& pattern, const std::string& text) {
    size_t p = 0, t = 0, star = std::string::npos, mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

std::vector<std::string> resolve_estimator_ids(const std::vector<std::string>& patterns) {
    std::vector<std::string> all;
    for (const auto& e : iv_registry()) all.push_back(e.id);
    for (const auto& e : spot_registry()) all.push_back(e.id);
    std::vector<bool> take(all.size(), false);
    for (const auto& pat : patterns) {
        bool any = false;
        for (size_t i = 0; i < all.size(); ++i)
            if (glob_match(pat, all[i])) take[i] = any = true;
        if (!any) throw std::invalid_argument("unknown estimator id: " + pat);
    }
    std::vector<std::string> out;
    for (size_t i = 0; i < all.size(); ++i)
        if (take[i]) out.push_back(all[i]);
    return out;
}

bool is_spot_id(const std::string& id) { return find_spot(id) != nullptr; }

}  // namespace qrvol
