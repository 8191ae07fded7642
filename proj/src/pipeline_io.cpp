#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "geoshoot/pipeline.hpp"

namespace geoshoot {

namespace {

bool starts_with(const std::string& s, const char* prefix) {
  return s.rfind(prefix, 0) == 0;
}

std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

PointSet read_xyz(std::istream& in) {
  std::vector<Vec3> pts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = strip(line);
    if (body.empty() || body[0] == '#') continue;
    std::istringstream ls(body);
    Vec3 p;
    if (!(ls >> p.x >> p.y >> p.z))
      throw ParseError(lineno, "expected three coordinates");
    std::string extra;
    if (ls >> extra) throw ParseError(lineno, "trailing content: " + extra);
    pts.push_back(p);
  }
  if (pts.empty()) throw ParseError(lineno, "no points");
  return PointSet(std::move(pts));
}

// Token walker over pre-split lines, so parse errors can carry line numbers.
struct TokenStream {
  std::vector<std::string> lines;
  std::size_t line = 0;
  std::size_t pos = 0;

  bool next(std::string& tok) {
    while (line < lines.size()) {
      const std::string& l = lines[line];
      while (pos < l.size() && std::isspace(static_cast<unsigned char>(l[pos])))
        ++pos;
      if (pos >= l.size()) {
        ++line;
        pos = 0;
        continue;
      }
      const std::size_t start = pos;
      while (pos < l.size() && !std::isspace(static_cast<unsigned char>(l[pos])))
        ++pos;
      tok = l.substr(start, pos - start);
      return true;
    }
    return false;
  }

  std::size_t line_number() const { return line + 1; }

  double next_double() {
    std::string tok;
    if (!next(tok)) throw ParseError(line_number(), "unexpected end of file");
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw ParseError(line_number(), "expected a number, got '" + tok + "'");
    }
  }
};

PointSet read_polydata(std::istream& in) {
  TokenStream ts;
  std::string line;
  while (std::getline(in, line)) ts.lines.push_back(line);
  if (ts.lines.empty() || !starts_with(ts.lines[0], "# vtk DataFile Version"))
    throw UnsupportedFormat("not a legacy vtk data file");
  if (ts.lines.size() < 4) throw ParseError(ts.lines.size(), "truncated header");
  // lines[1] is the free-text title
  const std::string encoding = strip(ts.lines[2]);
  if (encoding != "ASCII")
    throw UnsupportedFormat("only ASCII vtk files are supported, got '" +
                            encoding + "'");
  if (strip(ts.lines[3]) != "DATASET POLYDATA")
    throw UnsupportedFormat("only DATASET POLYDATA is supported");

  ts.line = 4;
  std::string tok;
  while (true) {
    if (!ts.next(tok)) throw ParseError(ts.line_number(), "no POINTS section");
    if (tok == "POINTS") break;
  }
  const double n_raw = ts.next_double();
  const auto n = static_cast<std::size_t>(n_raw);
  if (n_raw <= 0 || static_cast<double>(n) != n_raw)
    throw ParseError(ts.line_number(), "bad POINTS count");
  if (!ts.next(tok) || (tok != "float" && tok != "double"))
    throw ParseError(ts.line_number(), "POINTS type must be float or double");

  std::vector<Vec3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 p;
    p.x = ts.next_double();
    p.y = ts.next_double();
    p.z = ts.next_double();
    pts.push_back(p);
  }
  // cells (VERTICES/POLYGONS/...) are intentionally ignored
  return PointSet(std::move(pts));
}

void write_xyz(const PointSet& points, std::ostream& os,
               const std::vector<std::string>& comments) {
  char buf[128];
  for (const std::string& c : comments) os << "# " << c << '\n';
  for (const Vec3& p : points) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", p.x, p.y, p.z);
    os << buf;
  }
}

void write_polydata(const PointSet& points, std::ostream& os,
                    const std::vector<std::string>& comments) {
  char buf[128];
  os << "# vtk DataFile Version 3.0\n";
  os << (comments.empty() ? std::string("point set") : comments.front())
     << '\n';
  os << "ASCII\nDATASET POLYDATA\n";
  os << "POINTS " << points.size() << " double\n";
  for (const Vec3& p : points) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", p.x, p.y, p.z);
    os << buf;
  }
  os << "VERTICES " << points.size() << ' ' << 2 * points.size() << '\n';
  for (std::size_t i = 0; i < points.size(); ++i) os << "1 " << i << '\n';
}

}  // namespace

PointFormat format_for_path(const std::string& path) {
  const std::size_t dot = path.find_last_of('.');
  if (dot != std::string::npos && path.substr(dot) == ".vtk")
    return PointFormat::LegacyPolydataAscii;
  return PointFormat::XyzText;
}

PointSet read_points(const std::string& path, PointFormat format) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  switch (format) {
    case PointFormat::XyzText: return read_xyz(in);
    case PointFormat::LegacyPolydataAscii: return read_polydata(in);
  }
  throw UnsupportedFormat("unknown point format");
}

void write_points(const PointSet& points, const std::string& path,
                  PointFormat format,
                  const std::vector<std::string>& header_comments) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  switch (format) {
    case PointFormat::XyzText: write_xyz(points, os, header_comments); return;
    case PointFormat::LegacyPolydataAscii:
      write_polydata(points, os, header_comments);
      return;
  }
  throw UnsupportedFormat("unknown point format");
}

}  // namespace geoshoot
