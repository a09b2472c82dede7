#include "sqg/snapshot_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace sqg {

namespace {

constexpr char kMagic[] = "SQGLAB1\n";  // 8 bytes on disk (no terminator)

uint64_t to_le_bits(double v) {
  uint64_t u;
  std::memcpy(&u, &v, sizeof u);
  if constexpr (std::endian::native == std::endian::big) {
    u = __builtin_bswap64(u);
  }
  return u;
}

double from_le_bits(uint64_t u) {
  if constexpr (std::endian::native == std::endian::big) {
    u = __builtin_bswap64(u);
  }
  double v;
  std::memcpy(&v, &u, sizeof v);
  return v;
}

void write_payload(std::ostream& os, const std::vector<double>& values) {
  std::vector<uint64_t> buf(values.size());
  for (size_t i = 0; i < values.size(); ++i) buf[i] = to_le_bits(values[i]);
  os.write(reinterpret_cast<const char*>(buf.data()),
           static_cast<std::streamsize>(buf.size() * sizeof(uint64_t)));
}

void read_payload(std::istream& is, std::vector<double>& values) {
  std::vector<uint64_t> buf(values.size());
  is.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(uint64_t)));
  if (static_cast<size_t>(is.gcount()) != buf.size() * sizeof(uint64_t))
    throw std::runtime_error("snapshot_read: truncated payload");
  for (size_t i = 0; i < values.size(); ++i) values[i] = from_le_bits(buf[i]);
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Header {
  int n = 0;
  double length = 0.0, time = 0.0, alpha = 0.0, kappa = 0.0;
  bool has_ext = false;
  int layers_minus_one = 0;
  double z_min = 0.0, rho = 0.0;
};

Header parse_header(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (is.gcount() != 8 || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("snapshot_read: bad magic");
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("snapshot_read: missing header line");
  Header h;
  std::istringstream ss(line);
  std::string token;
  bool seen[5] = {false, false, false, false, false};
  while (ss >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("snapshot_read: malformed header token");
    const std::string key = token.substr(0, eq);
    const std::string val = token.substr(eq + 1);
    try {
      if (key == "N") {
        h.n = std::stoi(val);
        seen[0] = true;
      } else if (key == "L") {
        h.length = std::stod(val);
        seen[1] = true;
      } else if (key == "t") {
        h.time = std::stod(val);
        seen[2] = true;
      } else if (key == "alpha") {
        h.alpha = std::stod(val);
        seen[3] = true;
      } else if (key == "kappa") {
        h.kappa = std::stod(val);
        seen[4] = true;
      } else if (key == "J") {
        h.layers_minus_one = std::stoi(val);
        h.has_ext = true;
      } else if (key == "zmin") {
        h.z_min = std::stod(val);
      } else if (key == "rho") {
        h.rho = std::stod(val);
      } else {
        throw std::runtime_error("snapshot_read: unknown header key " + key);
      }
    } catch (const std::invalid_argument&) {
      throw std::runtime_error("snapshot_read: unparsable header value");
    } catch (const std::out_of_range&) {
      throw std::runtime_error("snapshot_read: header value out of range");
    }
  }
  for (bool s : seen)
    if (!s) throw std::runtime_error("snapshot_read: incomplete header");
  return h;
}

void expect_eof(std::istream& is, const char* what) {
  char extra;
  if (is.read(&extra, 1); is.gcount() != 0)
    throw std::runtime_error(std::string(what) +
                             ": payload length disagrees with header");
}

}  // namespace

void snapshot_write(const std::string& path, const PhysicalField& field,
                    double time, double alpha, double kappa) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("snapshot_write: cannot open " + path);
  os.write(kMagic, 8);
  os << "N=" << field.grid.n << " L=" << fmt17(field.grid.length)
     << " t=" << fmt17(time) << " alpha=" << fmt17(alpha)
     << " kappa=" << fmt17(kappa) << "\n";
  write_payload(os, field.values);
  if (!os) throw std::runtime_error("snapshot_write: write failed for " + path);
}

SnapshotFile snapshot_read(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("snapshot_read: cannot open " + path);
  const Header h = parse_header(is);
  if (h.has_ext)
    throw std::runtime_error("snapshot_read: file is an extension dump");
  SnapshotFile out;
  out.field = PhysicalField(Grid(h.n, h.length));
  out.time = h.time;
  out.alpha = h.alpha;
  out.kappa = h.kappa;
  read_payload(is, out.field.values);
  expect_eof(is, "snapshot_read");
  return out;
}

void extension_write(const std::string& path, const ExtensionField& ext,
                     double time, double kappa) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("extension_write: cannot open " + path);
  os.write(kMagic, 8);
  os << "N=" << ext.grid.n << " L=" << fmt17(ext.grid.length)
     << " t=" << fmt17(time) << " alpha=" << fmt17(ext.config.alpha)
     << " kappa=" << fmt17(kappa) << " J=" << ext.num_layers() - 1
     << " zmin=" << fmt17(ext.config.z_min) << " rho=" << fmt17(ext.config.rho)
     << "\n";
  for (const PhysicalField& layer : ext.layer) write_payload(os, layer.values);
  if (!os) throw std::runtime_error("extension_write: write failed for " + path);
}

ExtensionDump extension_read(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("extension_read: cannot open " + path);
  const Header h = parse_header(is);
  if (!h.has_ext)
    throw std::runtime_error("extension_read: file is a plain snapshot");
  if (h.layers_minus_one < 1)
    throw std::runtime_error("extension_read: no layers");
  ExtensionDump out;
  out.time = h.time;
  out.kappa = h.kappa;
  out.ext.grid = Grid(h.n, h.length);
  out.ext.config.alpha = h.alpha;
  out.ext.config.z_min = h.z_min;
  out.ext.config.rho = h.rho;
  out.ext.config.levels = h.layers_minus_one - 1;
  out.ext.z = out.ext.config.nodes();
  for (int j = 0; j <= h.layers_minus_one; ++j) {
    PhysicalField layer(out.ext.grid);
    read_payload(is, layer.values);
    out.ext.layer.push_back(std::move(layer));
  }
  expect_eof(is, "extension_read");
  return out;
}

}  // namespace sqg
