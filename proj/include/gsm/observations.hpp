#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gsm {

//! Monotone transform applied to the data before fitting.
enum class Transform { identity, cube_root };

std::string_view to_string(Transform t);
//! Parses "identity" or "cube_root"; throws std::invalid_argument otherwise.
Transform parse_transform(std::string_view name);

//! Applies the transform to a single value (must be >= 0).
double transform_value(double v, Transform t);

//! Strictly positive, finite sample with the transform it lives in.
class Observations {
public:
    Observations() = default;
    //! Throws std::invalid_argument if empty or any value is not strictly positive and finite.
    explicit Observations(std::vector<double> values, Transform transform = Transform::identity);

    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    double operator[](std::size_t i) const { return values_[i]; }
    Transform transform() const noexcept { return transform_; }

    double sum() const noexcept { return sum_; }
    double min() const noexcept { return min_; }
    double max() const noexcept { return max_; }

    //! Returns the data mapped through \p t. Only valid on untransformed data.
    Observations transformed(Transform t) const;

private:
    std::vector<double> values_;
    Transform transform_ = Transform::identity;
    double sum_ = 0.0;
    double min_ = 0.0;
    double max_ = 0.0;
};

}  // namespace gsm
