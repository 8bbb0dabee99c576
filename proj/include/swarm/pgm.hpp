#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "swarm/error.hpp"
#include "swarm/pheromone_field.hpp"
#include "swarm/torus.hpp"

namespace swarm {

// 8-bit grey image, row-major.
struct GreyImage {
  TorusDims dims;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(Coord c) const { return pixels[cell_index(c, dims)]; }

  friend bool operator==(const GreyImage&, const GreyImage&) = default;
};

namespace detail {

inline void skip_pnm_space(std::istream& in) {
  for (;;) {
    int ch = in.peek();
    if (ch == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (ch != EOF && std::isspace(ch)) {
      in.get();
    } else {
      return;
    }
  }
}

inline long read_pnm_int(std::istream& in) {
  skip_pnm_space(in);
  long v = -1;
  if (!(in >> v)) throw Error(ErrorCode::MalformedImage, "expected integer in PGM");
  return v;
}

}  // namespace detail

// Reads a P2 (ASCII) or P5 (binary, maxval < 256) greymap. Samples are
// rescaled to 0..255 when maxval differs from 255.
inline GreyImage read_pgm(std::istream& in) {
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  if (!in || (magic != "P2" && magic != "P5")) {
    throw Error(ErrorCode::MalformedImage, "not a P2/P5 greymap");
  }
  const long w = detail::read_pnm_int(in);
  const long h = detail::read_pnm_int(in);
  const long maxval = detail::read_pnm_int(in);
  if (w < 1 || h < 1 || maxval < 1 || maxval > 255) {
    throw Error(ErrorCode::MalformedImage, "bad PGM header");
  }
  GreyImage img{{static_cast<int>(w), static_cast<int>(h)}, {}};
  img.pixels.resize(img.dims.cells());
  auto scale = [maxval](long v) {
    if (v < 0 || v > maxval) {
      throw Error(ErrorCode::MalformedImage, "PGM sample out of range");
    }
    return static_cast<std::uint8_t>(
        maxval == 255 ? v : std::lround(255.0 * static_cast<double>(v) / maxval));
  };
  if (magic == "P2") {
    for (auto& p : img.pixels) p = scale(detail::read_pnm_int(in));
  } else {
    in.get();  // single whitespace byte after maxval
    std::vector<char> raw(img.pixels.size());
    in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
      throw Error(ErrorCode::MalformedImage, "truncated P5 raster");
    }
    for (std::size_t i = 0; i < raw.size(); ++i) {
      img.pixels[i] = scale(static_cast<unsigned char>(raw[i]));
    }
  }
  return img;
}

inline GreyImage read_pgm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  return read_pgm(in);
}

inline void write_pgm(std::ostream& out, const GreyImage& img) {
  out << "P2\n" << img.dims.width << ' ' << img.dims.height << "\n255\n";
  for (int y = 0; y < img.dims.height; ++y) {
    for (int x = 0; x < img.dims.width; ++x) {
      if (x) out << ' ';
      out << static_cast<int>(img.at({x, y}));
    }
    out << '\n';
  }
}

// Linear scaling with the field maximum mapped to 255; an all-zero field
// exports as all zeros.
inline GreyImage to_grey(const PheromoneField& f) {
  GreyImage img{f.dims(), std::vector<std::uint8_t>(f.dims().cells(), 0)};
  const double peak = f.max();
  if (peak <= 0.0) return img;
  const auto v = f.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    img.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * v[i] / peak));
  }
  return img;
}

inline void write_pgm(std::ostream& out, const PheromoneField& f) {
  write_pgm(out, to_grey(f));
}

}  // namespace swarm
