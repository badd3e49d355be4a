#include "rtmri/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace rtmri::fft {

namespace {

// Planning is not thread-safe in FFTW; execution of an existing plan is.
class PlanCache {
public:
  ~PlanCache()
  {
    for (auto &[key, plan] : plans_) { fftw_destroy_plan(plan); }
  }

  fftw_plan get(int width, int height, int sign)
  {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(width, height, sign);
    if (auto it = plans_.find(key); it != plans_.end()) { return it->second; }
    std::vector<cdouble> scratch(static_cast<std::size_t>(width) * height);
    auto *buf = reinterpret_cast<fftw_complex *>(scratch.data());
    fftw_plan plan = fftw_plan_dft_2d(height, width, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache &cache()
{
  static PlanCache instance;
  return instance;
}

void execute(std::span<cdouble> data, int width, int height, int sign)
{
  if (data.size() != static_cast<std::size_t>(width) * height) {
    throw InvalidArgument("fft: buffer size does not match dimensions");
  }
  auto *buf = reinterpret_cast<fftw_complex *>(data.data());
  fftw_execute_dft(cache().get(width, height, sign), buf, buf);
}

ComplexImage circular_shift(ComplexImage const &img, int sx, int sy)
{
  int const w = img.width();
  int const h = img.height();
  ComplexImage out(w, h);
  for (int y = 0; y < h; ++y) {
    int const ty = (y + sy) % h;
    for (int x = 0; x < w; ++x) { out((x + sx) % w, ty) = img(x, y); }
  }
  return out;
}

} // namespace

void forward(std::span<cdouble> data, int width, int height) { execute(data, width, height, FFTW_FORWARD); }

void backward(std::span<cdouble> data, int width, int height) { execute(data, width, height, FFTW_BACKWARD); }

ComplexImage ifftshift(ComplexImage const &img)
{
  // index n/2 -> 0
  return circular_shift(img, img.width() - img.width() / 2, img.height() - img.height() / 2);
}

ComplexImage fftshift(ComplexImage const &img) { return circular_shift(img, img.width() / 2, img.height() / 2); }

ComplexImage centered_forward(ComplexImage const &img)
{
  auto tmp = ifftshift(img);
  forward(tmp.data(), tmp.width(), tmp.height());
  return fftshift(tmp);
}

ComplexImage centered_inverse(ComplexImage const &khat)
{
  auto tmp = ifftshift(khat);
  backward(tmp.data(), tmp.width(), tmp.height());
  scale_in_place(tmp, 1.0 / static_cast<double>(tmp.size()));
  return fftshift(tmp);
}

} // namespace rtmri::fft
