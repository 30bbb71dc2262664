#ifndef ACSEG_IMAGE_IO_HPP
#define ACSEG_IMAGE_IO_HPP

#include <string>

#include "acseg/errors.hpp"
#include "acseg/image.hpp"

namespace acseg {

// Loads an 8-bit binary PGM (P5) or an 8-bit PNG, dispatching on the file
// signature. Samples map affinely from [0,maxval] onto [0,1]. For color PNG
// input `channel` selects the plane (0=R, 1=G, 2=B, 3=A); grayscale input
// accepts only channel 0. Throws IoError / FormatError / invalid_argument.
GrayImage load_image(const std::string& path, int channel = 0);

// Writes 8-bit output, format chosen by extension (.pgm/.pnm or .png).
// Values outside [0,1] are clamped; a warning with the clamp count goes to
// stderr.
void save_image(const GrayImage& img, const std::string& path);

// Binary masks as PGM/PNG with values {0,255}; loading maps >=128 to 1.
void save_mask(const EdgeMap& mask, const std::string& path);
EdgeMap load_mask(const std::string& path);

}  // namespace acseg

#endif
