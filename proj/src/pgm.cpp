#include "ghostsim/pgm.hpp"

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "ghostsim/error.hpp"
#include "ghostsim/fileutil.hpp"

namespace ghostsim {
namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string token;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      if (!token.empty()) return token;
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(char(ch));
  }
  return token;
}

std::size_t parse_header_number(std::istream& in, const char* what) {
  const std::string token = next_token(in);
  if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorCode::BadPgm, std::string("bad ") + what + " in PGM header");
  }
  return std::stoul(token);
}

}  // namespace

void write_pgm(const std::filesystem::path& path, const Image& img) {
  if (img.empty()) throw Error(ErrorCode::ZeroDimension, "cannot write an empty image");
  const Image unit = normalize_minmax(img);
  std::string bytes = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) +
                      "\n255\n";
  bytes.reserve(bytes.size() + img.size());
  for (double v : unit.pixels()) {
    bytes.push_back(char(static_cast<unsigned char>(std::lround(v * 255.0))));
  }
  write_file_atomic(path, bytes);
}

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  if (next_token(in) != "P5") throw Error(ErrorCode::BadPgm, path.string() + " is not a P5 PGM");
  const std::size_t width = parse_header_number(in, "width");
  const std::size_t height = parse_header_number(in, "height");
  const std::size_t maxval = parse_header_number(in, "maxval");
  if (width == 0 || height == 0) throw Error(ErrorCode::BadPgm, "PGM has zero extent");
  if (maxval == 0 || maxval > 255) throw Error(ErrorCode::BadPgm, "only 8-bit PGM is supported");
  // next_token consumed exactly one whitespace byte after maxval.
  std::vector<unsigned char> raw(width * height);
  in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size()));
  if (in.gcount() != std::streamsize(raw.size())) {
    throw Error(ErrorCode::BadPgm, path.string() + " has truncated pixel data");
  }
  std::vector<double> data(raw.begin(), raw.end());
  return Image(height, width, std::move(data));
}

}  // namespace ghostsim
