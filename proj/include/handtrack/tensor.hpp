#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace handtrack {

/// Dense channels x height x width array, row-major within a channel.
template <typename T>
class BasicTensor3 {
public:
    using value_type = T;

    BasicTensor3() = default;
    BasicTensor3(int channels, int height, int width, T fill = T{})
        : channels_(channels), height_(height), width_(width) {
        if (channels <= 0 || height <= 0 || width <= 0)
            throw std::invalid_argument("tensor dimensions must be positive, got " + shape_string(channels, height, width));
        data_.assign(static_cast<std::size_t>(channels) * height * width, fill);
    }

    int channels() const { return channels_; }
    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t size() const { return data_.size(); }
    std::size_t plane_size() const { return static_cast<std::size_t>(height_) * width_; }
    bool empty() const { return data_.empty(); }

    T& operator()(int c, int y, int x) { return data_[index(c, y, x)]; }
    const T& operator()(int c, int y, int x) const { return data_[index(c, y, x)]; }

    std::span<T> plane(int c) { return {data_.data() + c * plane_size(), plane_size()}; }
    std::span<const T> plane(int c) const { return {data_.data() + c * plane_size(), plane_size()}; }

    std::span<T> data() { return data_; }
    std::span<const T> data() const { return data_; }

    bool same_shape(const BasicTensor3& o) const {
        return channels_ == o.channels_ && height_ == o.height_ && width_ == o.width_;
    }

    std::string shape() const { return shape_string(channels_, height_, width_); }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(static_cast<double>(v)); });
    }

    bool all_zero() const {
        return std::all_of(data_.begin(), data_.end(), [](T v) { return v == T{}; });
    }

    T channel_max(int c) const {
        auto p = plane(c);
        return *std::max_element(p.begin(), p.end());
    }

    friend bool operator==(const BasicTensor3&, const BasicTensor3&) = default;

private:
    static std::string shape_string(int c, int h, int w) {
        return std::to_string(c) + "x" + std::to_string(h) + "x" + std::to_string(w);
    }
    std::size_t index(int c, int y, int x) const {
        return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
    }

    int channels_ = 0;
    int height_ = 0;
    int width_ = 0;
    std::vector<T> data_;
};

using Tensor3 = BasicTensor3<float>;

/// Channel-wise concatenation of tensors with equal spatial extent.
template <typename T>
BasicTensor3<T> concat_channels(const BasicTensor3<T>& a, const BasicTensor3<T>& b) {
    if (a.height() != b.height() || a.width() != b.width())
        throw std::invalid_argument("concat: spatial mismatch " + a.shape() + " vs " + b.shape());
    BasicTensor3<T> out(a.channels() + b.channels(), a.height(), a.width());
    std::copy(a.data().begin(), a.data().end(), out.data().begin());
    std::copy(b.data().begin(), b.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(a.size()));
    return out;
}

}  // namespace handtrack
