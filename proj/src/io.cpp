#include "fss/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "fss/error.hpp"

namespace fss {

namespace {

constexpr std::uint32_t kVersion = 1;
constexpr std::uint64_t kMaxVoxels = std::uint64_t{1} << 32;

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}

class Writer {
 public:
  void magic(std::string_view m) { out_.append(m); }
  void u32(std::uint32_t v) { put(to_little(v)); }
  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put(to_little(bits));
  }
  void byte(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void reserve(std::size_t n) { out_.reserve(n); }
  std::string take() { return std::move(out_); }

 private:
  template <typename T>
  void put(T v) {
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    out_.append(b, sizeof(T));
  }
  std::string out_;
};

class Reader {
 public:
  Reader(std::string_view data, const char* what) : data_(data), what_(what) {}

  void magic(std::string_view m) {
    need(m.size());
    if (data_.substr(pos_, m.size()) != m) fail("bad magic, expected '" + std::string(m) + "'");
    pos_ += m.size();
  }
  std::uint32_t u32() { return to_little(get<std::uint32_t>()); }
  float f32() {
    const std::uint32_t bits = to_little(get<std::uint32_t>());
    float v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  std::uint8_t byte() { return static_cast<std::uint8_t>(get<char>()); }
  std::size_t remaining() const { return data_.size() - pos_; }
  void need(std::size_t n) const {
    if (remaining() < n) fail("truncated payload");
  }
  void finish() const {
    if (remaining() != 0) fail(std::to_string(remaining()) + " trailing bytes");
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::format, std::string(what_) + ": " + msg);
  }

 private:
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string_view data_;
  std::size_t pos_ = 0;
  const char* what_;
};

void write_header(Writer& w, std::string_view magic, const GridFrame& f) {
  w.magic(magic);
  w.u32(kVersion);
  for (int d : f.dims) w.u32(static_cast<std::uint32_t>(d));
  for (double v : {f.voxel_size.x, f.voxel_size.y, f.voxel_size.z}) w.f32(static_cast<float>(v));
  for (double v : {f.origin.x, f.origin.y, f.origin.z}) w.f32(static_cast<float>(v));
}

GridFrame read_header(Reader& r, std::string_view magic, std::size_t bytes_per_voxel) {
  r.magic(magic);
  if (r.u32() != kVersion) r.fail("unsupported version");
  GridFrame f;
  std::uint64_t total = 1;
  for (int a = 0; a < 3; ++a) {
    const auto d = r.u32();
    if (d == 0 || d > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) r.fail("invalid grid dimension");
    f.dims[static_cast<std::size_t>(a)] = static_cast<int>(d);
    total *= d;
    if (total > kMaxVoxels) r.fail("grid too large");
  }
  const float sx = r.f32(), sy = r.f32(), sz = r.f32();
  const float ox = r.f32(), oy = r.f32(), oz = r.f32();
  f.voxel_size = {sx, sy, sz};
  f.origin = {ox, oy, oz};
  if (!is_finite(f.voxel_size) || !(sx > 0 && sy > 0 && sz > 0)) r.fail("voxel size must be positive and finite");
  if (!is_finite(f.origin)) r.fail("origin must be finite");
  if (r.remaining() != total * bytes_per_voxel) r.fail("payload length does not match grid dimensions");
  return f;
}

std::size_t header_size() { return 4 + 4 + 12 + 12 + 12; }

}  // namespace

std::string encode_streamlines(const StreamlineSet& set) {
  Writer w;
  std::size_t n_points = 0;
  for (const auto& s : set.streamlines) n_points += s.points.size();
  w.reserve(12 + 4 * set.size() + 12 * n_points);
  w.magic("STRL");
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(set.size()));
  for (const auto& s : set.streamlines) {
    if (s.points.size() < 2) throw Error(ErrorKind::invalid_streamline, "streamline with fewer than 2 points");
    w.u32(static_cast<std::uint32_t>(s.points.size()));
    for (const auto& p : s.points) {
      w.f32(static_cast<float>(p.x));
      w.f32(static_cast<float>(p.y));
      w.f32(static_cast<float>(p.z));
    }
  }
  return w.take();
}

StreamlineSet decode_streamlines(std::string_view bytes) {
  Reader r(bytes, "STRL");
  r.magic("STRL");
  if (r.u32() != kVersion) r.fail("unsupported version");
  const auto count = r.u32();
  // Each streamline needs at least 4 + 2 * 12 bytes.
  if (static_cast<std::uint64_t>(count) * 28 > r.remaining()) r.fail("count exceeds payload");
  StreamlineSet set;
  set.streamlines.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto n = r.u32();
    if (n < 2) r.fail("streamline " + std::to_string(i) + " has fewer than 2 points");
    if (static_cast<std::uint64_t>(n) * 12 > r.remaining()) r.fail("truncated payload");
    Streamline s;
    s.id = i;
    s.points.reserve(n);
    for (std::uint32_t j = 0; j < n; ++j) {
      const float x = r.f32(), y = r.f32(), z = r.f32();
      const Point3 p{x, y, z};
      if (!is_finite(p)) r.fail("non-finite coordinate in streamline " + std::to_string(i));
      s.points.push_back(p);
    }
    set.streamlines.push_back(std::move(s));
  }
  r.finish();
  return set;
}

std::string encode_mask(const VoxelMask& mask) {
  Writer w;
  w.reserve(header_size() + mask.occupancy().size());
  write_header(w, "MSKV", mask.frame());
  for (auto v : mask.occupancy()) w.byte(v != 0 ? 1 : 0);
  return w.take();
}

VoxelMask decode_mask(std::string_view bytes) {
  Reader r(bytes, "MSKV");
  const auto frame = read_header(r, "MSKV", 1);
  std::vector<std::uint8_t> occ(frame.voxel_count());
  for (auto& v : occ) {
    v = r.byte();
    if (v > 1) r.fail("occupancy values must be 0 or 1");
  }
  r.finish();
  return VoxelMask(frame, std::move(occ));
}

std::string encode_field(const OrientationField& field) {
  Writer w;
  w.reserve(header_size() + 16 * field.samples().size());
  write_header(w, "ORNT", field.frame());
  for (const auto& s : field.samples()) {
    w.f32(static_cast<float>(s.direction.x));
    w.f32(static_cast<float>(s.direction.y));
    w.f32(static_cast<float>(s.direction.z));
    w.f32(static_cast<float>(s.fa));
  }
  return w.take();
}

OrientationField decode_field(std::string_view bytes) {
  Reader r(bytes, "ORNT");
  const auto frame = read_header(r, "ORNT", 16);
  OrientationField field(frame);
  for (std::size_t i = 0; i < frame.voxel_count(); ++i) {
    const float x = r.f32(), y = r.f32(), z = r.f32(), fa = r.f32();
    const OrientationSample s{{x, y, z}, fa};
    if (!is_finite(s.direction) || !std::isfinite(s.fa) || s.fa < 0.0 || s.fa > 1.0) {
      r.fail("voxel " + std::to_string(i) + " has invalid direction or fa");
    }
    if (s.fa > 0.0 && std::abs(norm(s.direction) - 1.0) > 1e-4) {
      r.fail("voxel " + std::to_string(i) + " direction is not unit length");
    }
    field.set(i, s);
  }
  r.finish();
  return field;
}

std::string encode_density(const DensityVolume& volume) {
  if (volume.values.size() != volume.frame.voxel_count()) {
    throw Error(ErrorKind::format, "density payload size does not match grid dimensions");
  }
  Writer w;
  w.reserve(header_size() + 4 * volume.values.size());
  write_header(w, "DENS", volume.frame);
  for (float v : volume.values) w.f32(v);
  return w.take();
}

DensityVolume decode_density(std::string_view bytes) {
  Reader r(bytes, "DENS");
  DensityVolume out;
  out.frame = read_header(r, "DENS", 4);
  out.values.resize(out.frame.voxel_count());
  for (auto& v : out.values) v = r.f32();
  r.finish();
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::io, "read error on '" + path.string() + "'");
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw Error(ErrorKind::io, "write error on '" + path.string() + "'");
}

StreamlineSet load_streamlines(const std::filesystem::path& path) { return decode_streamlines(read_file(path)); }
VoxelMask load_mask(const std::filesystem::path& path) { return decode_mask(read_file(path)); }
OrientationField load_field(const std::filesystem::path& path) { return decode_field(read_file(path)); }
DensityVolume load_density(const std::filesystem::path& path) { return decode_density(read_file(path)); }

void save_streamlines(const std::filesystem::path& path, const StreamlineSet& set) {
  write_file(path, encode_streamlines(set));
}
void save_mask(const std::filesystem::path& path, const VoxelMask& mask) { write_file(path, encode_mask(mask)); }
void save_field(const std::filesystem::path& path, const OrientationField& field) {
  write_file(path, encode_field(field));
}
void save_density(const std::filesystem::path& path, const DensityVolume& volume) {
  write_file(path, encode_density(volume));
}

void check_frame(const StreamlineSet& set, const VoxelMask& mask) {
  const auto& f = mask.frame();
  const Point3 lo = f.lower_corner() - f.voxel_size;
  const Point3 hi = f.upper_corner() + f.voxel_size;
  for (const auto& s : set.streamlines) {
    for (const auto& p : s.points) {
      if (p.x < lo.x || p.y < lo.y || p.z < lo.z || p.x > hi.x || p.y > hi.y || p.z > hi.z) {
        throw Error(ErrorKind::frame_mismatch,
                    "streamline " + std::to_string(s.id) + " has a point outside the mask grid");
      }
    }
  }
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    throw Error(ErrorKind::format, "csv row has " + std::to_string(cells.size()) + " cells, header has " +
                                       std::to_string(header_.size()));
  }
  rows_.push_back(std::move(cells));
  return *this;
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out.push_back(',');
      out.append(cells[i]);
    }
    out.push_back('\n');
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      auto cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
      while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
      cells.emplace_back(cell);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace fss
