#pragma once

#include "rtmri/image.hpp"

namespace rtmri::fft {

// Convention (used by every operator in the library): the forward transform is
// the unnormalized sum with e^{-2 pi i <x,k>}; the inverse carries 1/(width*height).

/// In-place unnormalized forward DFT, origin at index 0 (no shifts).
void forward(std::span<cdouble> data, int width, int height);
/// In-place unnormalized backward DFT (e^{+2 pi i}), no 1/N factor.
void backward(std::span<cdouble> data, int width, int height);

/// Forward DFT with spatial and frequency origin at the grid center.
ComplexImage centered_forward(ComplexImage const &img);
/// Inverse of centered_forward, including the 1/(width*height) factor.
ComplexImage centered_inverse(ComplexImage const &khat);

/// Move the centered origin (index n/2) to index 0.
ComplexImage ifftshift(ComplexImage const &img);
/// Move index 0 to the centered origin (index n/2).
ComplexImage fftshift(ComplexImage const &img);

} // namespace rtmri::fft
