#include "vxshape/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <vector>

namespace vxs {

namespace {

// Skips whitespace and '#' comment lines between header tokens.
bool next_header_token(std::istream& in, std::string& tok) {
  tok.clear();
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  if (c == EOF) return false;
  while (c != EOF && !std::isspace(c) && c != '#') {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  if (c == '#') in.unget();
  return !tok.empty();
}

long parse_positive(const std::string& tok, const char* what) {
  if (tok.empty() ||
      !std::all_of(tok.begin(), tok.end(),
                   [](unsigned char ch) { return std::isdigit(ch); }))
    throw PgmFormatError(std::string("pgm: malformed header, bad ") + what +
                         " '" + tok + "'");
  long v = std::stol(tok);
  if (v <= 0)
    throw PgmFormatError(std::string("pgm: malformed header, nonpositive ") +
                         what);
  return v;
}

}  // namespace

GridFunction load_pgm(const std::string& path, BoundaryCondition bc) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PgmIoError("pgm: cannot open '" + path + "' for reading");

  std::string magic;
  if (!next_header_token(in, magic))
    throw PgmFormatError("pgm: malformed header, missing magic in '" + path +
                         "'");
  const bool ascii = magic == "P2";
  if (!ascii && magic != "P5")
    throw PgmFormatError("pgm: malformed header, magic '" + magic +
                         "' is not P2/P5");

  std::string tok;
  if (!next_header_token(in, tok))
    throw PgmFormatError("pgm: malformed header, missing width");
  const long w = parse_positive(tok, "width");
  if (!next_header_token(in, tok))
    throw PgmFormatError("pgm: malformed header, missing height");
  const long hgt = parse_positive(tok, "height");
  if (!next_header_token(in, tok))
    throw PgmFormatError("pgm: malformed header, missing maxval");
  const long maxval = parse_positive(tok, "maxval");
  if (maxval > 65535)
    throw PgmFormatError("pgm: malformed header, maxval > 65535");

  if (w != hgt)
    throw PgmShapeError("pgm: non-square image " + std::to_string(w) + "x" +
                        std::to_string(hgt) + " in '" + path + "'");
  if (w < 8) throw PgmShapeError("pgm: image smaller than 8x8");

  const int n = static_cast<int>(w);
  std::vector<double> raw(static_cast<size_t>(n) * n);
  if (ascii) {
    for (auto& v : raw) {
      long x;
      if (!(in >> x) || x < 0 || x > maxval)
        throw PgmFormatError("pgm: truncated or out-of-range P2 data in '" +
                             path + "'");
      v = static_cast<double>(x);
    }
  } else {
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> buf(raw.size() * bytes);
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size()))
      throw PgmFormatError("pgm: truncated P5 data in '" + path + "'");
    for (size_t k = 0; k < raw.size(); ++k)
      raw[k] = bytes == 1
                   ? static_cast<double>(buf[k])
                   : static_cast<double>(buf[2 * k] * 256 + buf[2 * k + 1]);
  }

  Grid grid(n);
  GridFunction u(grid, bc);
  // file row 0 = top of image = largest y
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      u(i, j) = raw[static_cast<size_t>(n - 1 - j) * n + i] /
                static_cast<double>(maxval);
  return u;
}

void save_pgm(const GridFunction& u, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PgmIoError("pgm: cannot open '" + path + "' for writing");
  const int n = u.grid().n;
  out << "P5\n" << n << " " << n << "\n255\n";
  std::vector<unsigned char> row(n);
  for (int j = n - 1; j >= 0; --j) {
    for (int i = 0; i < n; ++i) {
      double v = std::clamp(u(i, j), 0.0, 1.0);
      row[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    out.write(reinterpret_cast<const char*>(row.data()), n);
  }
  if (!out) throw PgmIoError("pgm: write failed for '" + path + "'");
}

}  // namespace vxs
