#include "mrfuse/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace mrfuse {

static_assert(std::endian::native == std::endian::little,
              "NMAT/WAV writers assume a little-endian host");

namespace {

constexpr char kNmatMagic[4] = {'N', 'M', 'A', 'T'};

void put_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

void put_u16(std::ostream& os, std::uint16_t v) {
  os.write(reinterpret_cast<const char*>(&v), 2);
}

std::filesystem::path temp_sibling(const std::filesystem::path& path) {
  return path.parent_path() / (path.filename().string() + ".tmp");
}

void commit(const std::filesystem::path& tmp, const std::filesystem::path& path) {
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("rename " + tmp.string() + " -> " + path.string() + ": " +
                  ec.message());
  }
}

}  // namespace

void save_nmat(const std::filesystem::path& path, const Matrix& m) {
  if (m.rows() > std::numeric_limits<std::uint32_t>::max() ||
      m.cols() > std::numeric_limits<std::uint32_t>::max()) {
    throw IoError("save_nmat: " + m.shape_str() + " exceeds u32 dimensions");
  }
  const auto tmp = temp_sibling(path);
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("save_nmat: cannot open " + tmp.string());
    os.write(kNmatMagic, 4);
    put_u32(os, static_cast<std::uint32_t>(m.rows()));
    put_u32(os, static_cast<std::uint32_t>(m.cols()));
    put_u32(os, 0);  // reserved
    os.write(reinterpret_cast<const char*>(m.data()),
             static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!os) throw IoError("save_nmat: write failed for " + tmp.string());
  }
  commit(tmp, path);
}

Matrix load_nmat(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("load_nmat: cannot open " + path.string());
  char magic[4] = {};
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kNmatMagic, 4) != 0) {
    throw IoError("load_nmat: " + path.string() + " is not an NMAT file");
  }
  const std::uint32_t rows = get_u32(is);
  const std::uint32_t cols = get_u32(is);
  get_u32(is);  // reserved
  std::vector<double> data(static_cast<std::size_t>(rows) * cols);
  is.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!is) {
    throw IoError("load_nmat: truncated payload in " + path.string());
  }
  Matrix m(rows, cols, std::move(data));
  m.validate("load_nmat(" + path.string() + ")");
  return m;
}

void save_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << m(i, j);
    }
    os << '\n';
  }
  atomic_write(path, os.str());
}

Matrix load_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("load_csv: cannot open " + path.string());
  std::vector<double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::size_t row_cols = 0;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        data.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("load_csv: bad value '" + cell + "' in " + path.string());
      }
      ++row_cols;
    }
    if (rows == 0) {
      cols = row_cols;
    } else if (row_cols != cols) {
      throw IoError("load_csv: ragged row " + std::to_string(rows) + " in " +
                    path.string() + " (" + std::to_string(row_cols) + " vs " +
                    std::to_string(cols) + " columns)");
    }
    ++rows;
  }
  Matrix m(rows, cols, std::move(data));
  m.validate("load_csv(" + path.string() + ")");
  return m;
}

void save_pgm(const std::filesystem::path& path,
              const std::vector<std::uint8_t>& gray, std::size_t height,
              std::size_t width, const std::string& comment) {
  if (gray.size() != height * width) {
    throw IoError("save_pgm: " + std::to_string(gray.size()) +
                  " bytes for a " + shape_str(height, width) + " image");
  }
  std::ostringstream os;
  os << "P5\n";
  if (!comment.empty()) os << "# " << comment << '\n';
  os << width << ' ' << height << "\n255\n";
  os.write(reinterpret_cast<const char*>(gray.data()),
           static_cast<std::streamsize>(gray.size()));
  atomic_write(path, os.str());
}

void save_wav_mono16(const std::filesystem::path& path,
                     const std::vector<double>& samples, std::uint32_t rate) {
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(samples.size() * 2);
  const auto tmp = temp_sibling(path);
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("save_wav: cannot open " + tmp.string());
    os.write("RIFF", 4);
    put_u32(os, 36 + data_bytes);
    os.write("WAVE", 4);
    os.write("fmt ", 4);
    put_u32(os, 16);
    put_u16(os, 1);  // PCM
    put_u16(os, 1);  // mono
    put_u32(os, rate);
    put_u32(os, rate * 2);  // byte rate
    put_u16(os, 2);         // block align
    put_u16(os, 16);        // bits per sample
    os.write("data", 4);
    put_u32(os, data_bytes);
    for (double s : samples) {
      const double clipped = std::clamp(s, -1.0, 1.0);
      const auto v = static_cast<std::int16_t>(std::lround(clipped * 32767.0));
      os.write(reinterpret_cast<const char*>(&v), 2);
    }
    if (!os) throw IoError("save_wav: write failed for " + tmp.string());
  }
  commit(tmp, path);
}

std::vector<double> load_wav_mono16(const std::filesystem::path& path,
                                    std::uint32_t* rate_out) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("load_wav: cannot open " + path.string());
  char tag[4];
  is.read(tag, 4);
  if (!is || std::memcmp(tag, "RIFF", 4) != 0)
    throw IoError("load_wav: " + path.string() + " is not a RIFF file");
  get_u32(is);
  is.read(tag, 4);
  if (!is || std::memcmp(tag, "WAVE", 4) != 0)
    throw IoError("load_wav: " + path.string() + " is not a WAVE file");

  std::uint32_t rate = 0;
  std::uint16_t channels = 0;
  std::uint16_t bits = 0;
  std::vector<double> samples;
  while (is.read(tag, 4)) {
    const std::uint32_t chunk = get_u32(is);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      std::uint16_t format = 0;
      is.read(reinterpret_cast<char*>(&format), 2);
      is.read(reinterpret_cast<char*>(&channels), 2);
      rate = get_u32(is);
      get_u32(is);
      std::uint16_t block = 0;
      is.read(reinterpret_cast<char*>(&block), 2);
      is.read(reinterpret_cast<char*>(&bits), 2);
      is.ignore(chunk > 16 ? chunk - 16 : 0);
      if (format != 1 || channels != 1 || bits != 16) {
        throw IoError("load_wav: " + path.string() +
                      " is not 16-bit mono PCM");
      }
    } else if (std::memcmp(tag, "data", 4) == 0) {
      samples.resize(chunk / 2);
      for (auto& s : samples) {
        std::int16_t v = 0;
        is.read(reinterpret_cast<char*>(&v), 2);
        s = static_cast<double>(v) / 32767.0;
      }
      break;
    } else {
      is.ignore(chunk);
    }
  }
  if (rate == 0) throw IoError("load_wav: missing fmt chunk in " + path.string());
  if (rate_out) *rate_out = rate;
  return samples;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = temp_sibling(path);
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("atomic_write: cannot open " + tmp.string());
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw IoError("atomic_write: write failed for " + tmp.string());
  }
  commit(tmp, path);
}

}  // namespace mrfuse
