#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtmri {

using cdouble = std::complex<double>;
using SampleVector = std::vector<cdouble>;

/// Thrown when an argument violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

inline bool is_finite(double v) { return std::isfinite(v); }
inline bool is_finite(cdouble v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

/// Dense 2D grid stored row-major (index = y * width + x).
///
/// Pixel (x, y) sits at the centered coordinate (x - width/2, y - height/2);
/// every Fourier-domain operation in the library uses that origin.
template <typename T>
class Image {
public:
  using value_type = T;

  Image() = default;

  Image(int width, int height, T fill = T{}) : width_(width), height_(height)
  {
    check_dims(width, height);
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  Image(int width, int height, std::vector<T> data)
    : width_(width), height_(height), data_(std::move(data))
  {
    check_dims(width, height);
    if (data_.size() != static_cast<std::size_t>(width) * height) {
      throw InvalidArgument("image data length does not match dimensions");
    }
    for (auto const &v : data_) {
      if (!is_finite(v)) { throw InvalidArgument("image contains non-finite values"); }
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T &operator()(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  T const &operator()(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  T &operator[](std::size_t i) { return data_[i]; }
  T const &operator[](std::size_t i) const { return data_[i]; }

  std::span<T> data() { return data_; }
  std::span<T const> data() const { return data_; }
  std::vector<T> &values() { return data_; }
  std::vector<T> const &values() const { return data_; }

  template <typename U>
  bool same_shape(Image<U> const &o) const
  {
    return width_ == o.width() && height_ == o.height();
  }

  bool all_finite() const
  {
    for (auto const &v : data_) {
      if (!is_finite(v)) { return false; }
    }
    return true;
  }

  bool operator==(Image const &) const = default;

private:
  static void check_dims(int w, int h)
  {
    if (w < 2 || h < 2) { throw InvalidArgument("image dimensions must be at least 2x2"); }
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using ComplexImage = Image<cdouble>;
using RealImage = Image<double>;

inline void require_same_shape(auto const &a, auto const &b, char const *what)
{
  if (!a.same_shape(b)) { throw InvalidArgument(std::string(what) + ": dimension mismatch"); }
}

RealImage magnitude(ComplexImage const &img);
ComplexImage to_complex(RealImage const &img);

// Pointwise helpers used throughout the operator code.
ComplexImage multiply(ComplexImage const &a, ComplexImage const &b);
ComplexImage multiply_conj(ComplexImage const &a, ComplexImage const &b); // conj(a) * b
void add_in_place(ComplexImage &acc, ComplexImage const &v);
void scale_in_place(ComplexImage &img, cdouble s);

double l2_norm(std::span<cdouble const> v);
double l2_norm(std::span<double const> v);
cdouble dot(std::span<cdouble const> a, std::span<cdouble const> b); // sum conj(a) b

} // namespace rtmri
