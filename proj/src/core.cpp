#include "rtmri/core.hpp"

#include "rtmri/fft.hpp"

#include <algorithm>
#include <sstream>

namespace rtmri {

void SobolevConfig::validate() const
{
  if (!(a > 0.0) || !(b > 0.0) || !(m >= 0.0) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(m)) {
    throw InvalidArgument("SobolevConfig requires a > 0, b > 0, m >= 0");
  }
}

RealImage sobolev_weights(int width, int height, SobolevConfig const &cfg)
{
  cfg.validate();
  RealImage w(width, height);
  for (int y = 0; y < height; ++y) {
    double const ky = static_cast<double>(y - height / 2) / height;
    for (int x = 0; x < width; ++x) {
      double const kx = static_cast<double>(x - width / 2) / width;
      w(x, y) = std::pow(1.0 + cfg.b * (kx * kx + ky * ky), -cfg.m / 2.0) / cfg.a;
    }
  }
  return w;
}

SobolevWeighting::SobolevWeighting(int width, int height, SobolevConfig const &cfg)
  : cfg_(cfg), weights_(sobolev_weights(width, height, cfg))
{
}

ComplexImage SobolevWeighting::apply(ComplexImage const &khat) const
{
  require_same_shape(khat, weights_, "sobolev_weight_apply");
  ComplexImage scaled(khat.width(), khat.height());
  for (std::size_t i = 0; i < khat.size(); ++i) { scaled[i] = khat[i] * weights_[i]; }
  return fft::centered_inverse(scaled);
}

ComplexImage SobolevWeighting::adjoint(ComplexImage const &img) const
{
  require_same_shape(img, weights_, "sobolev_weight_adjoint");
  auto out = fft::centered_forward(img);
  double const inv_n = 1.0 / static_cast<double>(img.size());
  for (std::size_t i = 0; i < out.size(); ++i) { out[i] *= weights_[i] * inv_n; }
  return out;
}

ComplexImage sobolev_weight_apply(ComplexImage const &khat, SobolevConfig const &cfg)
{
  if (!khat.all_finite()) { throw InvalidArgument("sobolev_weight_apply: non-finite input"); }
  return SobolevWeighting(khat.width(), khat.height(), cfg).apply(khat);
}

ComplexImage sobolev_weight_adjoint(ComplexImage const &img, SobolevConfig const &cfg)
{
  if (!img.all_finite()) { throw InvalidArgument("sobolev_weight_adjoint: non-finite input"); }
  return SobolevWeighting(img.width(), img.height(), cfg).adjoint(img);
}

WindowSpec::WindowSpec(std::vector<int> offsets) : offsets_(std::move(offsets))
{
  if (!std::is_sorted(offsets_.begin(), offsets_.end()) ||
      std::adjacent_find(offsets_.begin(), offsets_.end()) != offsets_.end()) {
    throw InvalidArgument("window offsets must be strictly increasing");
  }
  if (std::find(offsets_.begin(), offsets_.end(), 0) == offsets_.end()) {
    throw InvalidArgument("window offsets must contain 0");
  }
}

WindowSpec WindowSpec::clipped(int t, int frame_count) const
{
  std::vector<int> kept;
  for (int s : offsets_) {
    if (t + s >= 0 && t + s < frame_count) { kept.push_back(s); }
  }
  return WindowSpec(std::move(kept));
}

WindowSpec WindowSpec::parse(std::string const &text)
{
  std::vector<int> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stoi(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) { throw InvalidArgument(item); }
    } catch (std::exception const &) {
      throw InvalidArgument("invalid window entry '" + item + "'");
    }
  }
  std::sort(values.begin(), values.end());
  return WindowSpec(std::move(values));
}

Unknowns::Unknowns(ComplexImage density, std::vector<int> offsets, int coil_count, std::vector<ComplexImage> coils)
  : density_(std::move(density)), offsets_(std::move(offsets)), coil_count_(coil_count), coils_(std::move(coils))
{
  if (coil_count_ < 1) { throw InvalidArgument("Unknowns: at least one coil required"); }
  if (coils_.size() != offsets_.size() * static_cast<std::size_t>(coil_count_)) {
    throw InvalidArgument("Unknowns: coil maps must cover every (offset, coil) pair");
  }
  for (auto const &c : coils_) { require_same_shape(density_, c, "Unknowns"); }
}

Unknowns Unknowns::zeros(int width, int height, std::vector<int> offsets, int coil_count)
{
  std::vector<ComplexImage> coils(offsets.size() * static_cast<std::size_t>(coil_count), ComplexImage(width, height));
  return Unknowns(ComplexImage(width, height), std::move(offsets), coil_count, std::move(coils));
}

std::size_t Unknowns::offset_index(int s) const
{
  auto it = std::find(offsets_.begin(), offsets_.end(), s);
  if (it == offsets_.end()) { throw InvalidArgument("Unknowns: offset " + std::to_string(s) + " not present"); }
  return static_cast<std::size_t>(it - offsets_.begin());
}

bool Unknowns::same_shape(Unknowns const &o) const
{
  return density_.same_shape(o.density_) && offsets_ == o.offsets_ && coil_count_ == o.coil_count_;
}

Unknowns Unknowns::zeros_like() const { return zeros(width(), height(), offsets_, coil_count_); }

std::size_t Unknowns::element_count() const { return density_.size() * (1 + coils_.size()); }

namespace {
void require_shape(Unknowns const &a, Unknowns const &b)
{
  if (!a.same_shape(b)) { throw InvalidArgument("Unknowns: shape mismatch"); }
}
} // namespace

void Unknowns::axpy(cdouble s, Unknowns const &x)
{
  require_shape(*this, x);
  for (std::size_t i = 0; i < density_.size(); ++i) { density_[i] += s * x.density_[i]; }
  for (std::size_t c = 0; c < coils_.size(); ++c) {
    auto &dst = coils_[c];
    auto const &src = x.coils_[c];
    for (std::size_t i = 0; i < dst.size(); ++i) { dst[i] += s * src[i]; }
  }
}

Unknowns &Unknowns::operator+=(Unknowns const &o)
{
  axpy(1.0, o);
  return *this;
}

Unknowns &Unknowns::operator-=(Unknowns const &o)
{
  axpy(-1.0, o);
  return *this;
}

Unknowns &Unknowns::operator*=(cdouble s)
{
  scale_in_place(density_, s);
  for (auto &c : coils_) { scale_in_place(c, s); }
  return *this;
}

bool Unknowns::all_finite() const
{
  if (!density_.all_finite()) { return false; }
  return std::all_of(coils_.begin(), coils_.end(), [](auto const &c) { return c.all_finite(); });
}

Unknowns operator+(Unknowns a, Unknowns const &b) { return a += b; }
Unknowns operator-(Unknowns a, Unknowns const &b) { return a -= b; }
Unknowns operator*(cdouble s, Unknowns a) { return a *= s; }

cdouble inner_product(Unknowns const &x, Unknowns const &y)
{
  require_shape(x, y);
  cdouble s = dot(x.density().data(), y.density().data());
  for (std::size_t c = 0; c < x.coils().size(); ++c) { s += dot(x.coils()[c].data(), y.coils()[c].data()); }
  return s;
}

double norm(Unknowns const &x) { return std::sqrt(std::max(0.0, inner_product(x, x).real())); }

} // namespace rtmri
