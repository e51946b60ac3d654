#include "gsm/observations.hpp"

#include <algorithm>
#include <cmath>

namespace gsm {

std::string_view to_string(Transform t) {
    switch (t) {
        case Transform::identity:
            return "identity";
        case Transform::cube_root:
            return "cube_root";
    }
    return "identity";
}

Transform parse_transform(std::string_view name) {
    if (name == "identity") {
        return Transform::identity;
    }
    if (name == "cube_root") {
        return Transform::cube_root;
    }
    throw std::invalid_argument("unknown transform '" + std::string(name) + "'");
}

double transform_value(double v, Transform t) {
    if (std::isnan(v) || v < 0.0) {
        throw std::domain_error("transform_value: value must be nonnegative");
    }
    return t == Transform::cube_root ? std::cbrt(v) : v;
}

Observations::Observations(std::vector<double> values, Transform transform)
    : values_(std::move(values)), transform_(transform) {
    if (values_.empty()) {
        throw std::invalid_argument("Observations: empty sample");
    }
    min_ = values_.front();
    max_ = values_.front();
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double v = values_[i];
        if (!std::isfinite(v) || v <= 0.0) {
            throw std::invalid_argument("Observations: value at index " + std::to_string(i) +
                                        " is not strictly positive and finite");
        }
        sum_ += v;
        min_ = std::min(min_, v);
        max_ = std::max(max_, v);
    }
}

Observations Observations::transformed(Transform t) const {
    if (transform_ != Transform::identity) {
        throw std::logic_error("Observations: data already transformed");
    }
    std::vector<double> out(values_.size());
    std::transform(values_.begin(), values_.end(), out.begin(),
                   [t](double v) { return transform_value(v, t); });
    return Observations(std::move(out), t);
}

}  // namespace gsm
