#include "rtmri/image.hpp"

namespace rtmri {

RealImage magnitude(ComplexImage const &img)
{
  RealImage out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) { out[i] = std::abs(img[i]); }
  return out;
}

ComplexImage to_complex(RealImage const &img)
{
  ComplexImage out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) { out[i] = img[i]; }
  return out;
}

ComplexImage multiply(ComplexImage const &a, ComplexImage const &b)
{
  require_same_shape(a, b, "multiply");
  ComplexImage out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) { out[i] = a[i] * b[i]; }
  return out;
}

ComplexImage multiply_conj(ComplexImage const &a, ComplexImage const &b)
{
  require_same_shape(a, b, "multiply_conj");
  ComplexImage out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) { out[i] = std::conj(a[i]) * b[i]; }
  return out;
}

void add_in_place(ComplexImage &acc, ComplexImage const &v)
{
  require_same_shape(acc, v, "add_in_place");
  for (std::size_t i = 0; i < acc.size(); ++i) { acc[i] += v[i]; }
}

void scale_in_place(ComplexImage &img, cdouble s)
{
  for (auto &v : img.data()) { v *= s; }
}

double l2_norm(std::span<cdouble const> v)
{
  double s = 0.0;
  for (auto const &x : v) { s += std::norm(x); }
  return std::sqrt(s);
}

double l2_norm(std::span<double const> v)
{
  double s = 0.0;
  for (auto const x : v) { s += x * x; }
  return std::sqrt(s);
}

cdouble dot(std::span<cdouble const> a, std::span<cdouble const> b)
{
  if (a.size() != b.size()) { throw InvalidArgument("dot: length mismatch"); }
  cdouble s{};
  for (std::size_t i = 0; i < a.size(); ++i) { s += std::conj(a[i]) * b[i]; }
  return s;
}

} // namespace rtmri
