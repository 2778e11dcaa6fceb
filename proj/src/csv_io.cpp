#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "kuramoto/error.hpp"
#include "kuramoto/experiment.hpp"
#include "kuramoto/observables.hpp"

namespace kuramoto {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(Errc::IoError, "cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error(Errc::IoError, "write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::IoError, "cannot rename '" + tmp.string() + "': " + ec.message());
}

std::string trajectory_csv(const Trajectory& traj) {
  const auto& p = traj.params;
  const std::size_t n = p.size();
  std::string out = "t";
  for (std::size_t i = 0; i < n; ++i) out += ",theta_" + std::to_string(i);
  for (std::size_t i = 0; i < n; ++i) out += ",omega_" + std::to_string(i);
  out += ",R_p,phi_p,E_K,E_P,D_theta,D_omega,F\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& s = traj.states[k];
    const auto g = global_order(s.theta);
    const auto e = energies(s, p);
    const auto d = diameters(s, p);
    out += format_double(traj.times[k]);
    for (double x : s.theta) out += "," + format_double(x);
    for (double x : s.omega) out += "," + format_double(x);
    for (double x : {g.R, g.phi, e.E_K, e.E_P, d.D_theta, d.D_omega, freq_functional(s, p)}) {
      out += "," + format_double(x);
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  return cells;
}

double to_double(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const double x = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return x;
  } catch (const std::exception&) {
    throw Error(Errc::IoError, path.string() + ":" + std::to_string(line) + ": not a number: '" + s + "'");
  }
}

}  // namespace

OscillatorEnsemble read_state_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::IoError, path.string() + ": empty file");
  const auto header = split(line);
  OscillatorEnsemble s;
  if (header.size() == 2 && header[0] == "theta" && header[1] == "omega") {
    std::size_t ln = 1;
    while (std::getline(in, line)) {
      ++ln;
      if (line.empty() || line == "\r") continue;
      const auto cells = split(line);
      if (cells.size() != 2) throw Error(Errc::IoError, path.string() + ":" + std::to_string(ln) + ": expected 2 columns");
      s.theta.push_back(to_double(cells[0], path, ln));
      s.omega.push_back(to_double(cells[1], path, ln));
    }
  } else if (!header.empty() && header[0] == "t") {
    std::size_t n = 0;
    while (n + 1 < header.size() && header[n + 1] == "theta_" + std::to_string(n)) ++n;
    std::string last;
    std::size_t ln = 1, last_ln = 0;
    while (std::getline(in, line)) {
      ++ln;
      if (!line.empty() && line != "\r") {
        last = line;
        last_ln = ln;
      }
    }
    if (last_ln == 0) throw Error(Errc::IoError, path.string() + ": no data rows");
    const auto cells = split(last);
    if (cells.size() < 1 + 2 * n) throw Error(Errc::IoError, path.string() + ": short row");
    for (std::size_t i = 0; i < n; ++i) {
      s.theta.push_back(to_double(cells[1 + i], path, last_ln));
      s.omega.push_back(to_double(cells[1 + n + i], path, last_ln));
    }
  } else {
    throw Error(Errc::IoError, path.string() + ": expected a 'theta,omega' snapshot or a trajectory CSV");
  }
  if (s.theta.empty()) throw Error(Errc::IoError, path.string() + ": no oscillators");
  return s;
}

}  // namespace kuramoto
