#include "rksindy/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rksindy/errors.hpp"

namespace rksindy {

void Trajectory::validate() const {
  if (times.empty()) throw InsufficientDataError("trajectory has no samples");
  if (states.rows() != times.size())
    throw DimensionError("state rows do not match the number of samples");
  if (!inputs.empty() && inputs.rows() != times.size())
    throw DimensionError("input rows do not match the number of samples");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(times[k])) throw std::invalid_argument("non-finite sample time");
    if (k > 0 && !(times[k] > times[k - 1]))
      throw std::invalid_argument("sample times must be strictly increasing");
  }
  auto finite = [](const Matrix& m) {
    return std::all_of(m.data(), m.data() + m.rows() * m.cols(),
                       [](double v) { return std::isfinite(v); });
  };
  if (!finite(states) || !finite(inputs))
    throw std::invalid_argument("trajectory contains non-finite values");
  for (double p : params)
    if (!std::isfinite(p)) throw std::invalid_argument("non-finite parameter value");
}

void TrajectorySet::validate() const {
  if (items.empty()) throw InsufficientDataError("trajectory set is empty");
  for (const auto& traj : items) {
    traj.validate();
    if (traj.state_dim() != state_dim() || traj.input_dim() != input_dim() ||
        traj.param_dim() != param_dim())
      throw DimensionError("trajectories in a set must share dimensions");
  }
}

namespace {

// One classical fourth-order step; local to keep this file independent of
// the prediction-map header.
void reference_step(const VectorField& rhs, std::vector<double>& x, double h,
                    std::vector<double>& k1, std::vector<double>& k2, std::vector<double>& k3,
                    std::vector<double>& k4, std::vector<double>& y) {
  const std::size_t n = x.size();
  rhs(x, k1);
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + 0.5 * h * k1[i];
  rhs(y, k2);
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + 0.5 * h * k2[i];
  rhs(y, k3);
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + h * k3[i];
  rhs(y, k4);
  for (std::size_t i = 0; i < n; ++i)
    x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

}  // namespace

Trajectory simulate_reference(const VectorField& rhs, std::span<const double> x0,
                              std::span<const double> times, int substeps) {
  if (times.size() < 1) throw InsufficientDataError("need at least one sample time");
  if (substeps < 1) throw std::invalid_argument("substeps must be positive");
  const std::size_t n = x0.size();

  Trajectory traj;
  traj.times.assign(times.begin(), times.end());
  traj.states = Matrix(times.size(), n);

  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> k1(n), k2(n), k3(n), k4(n), y(n);
  for (std::size_t i = 0; i < n; ++i) traj.states(0, i) = x[i];

  for (std::size_t k = 1; k < times.size(); ++k) {
    const double h = (times[k] - times[k - 1]) / substeps;
    if (!(h > 0.0)) throw std::invalid_argument("sample times must be strictly increasing");
    for (int s = 0; s < substeps; ++s) reference_step(rhs, x, h, k1, k2, k3, k4, y);
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(x[i]))
        throw DivergenceError("simulation diverged at sample", k);
      traj.states(k, i) = x[i];
    }
  }
  return traj;
}

Trajectory simulate_controlled(const ControlledField& rhs, std::span<const double> x0,
                               std::span<const double> times, const Matrix& inputs,
                               int substeps) {
  if (inputs.rows() != times.size())
    throw DimensionError("input rows do not match the number of samples");
  // The input is frozen over each interval, so every interval is an
  // autonomous solve with its own captured row.
  std::span<const double> u_row;
  VectorField frozen = [&rhs, &u_row](std::span<const double> x, std::span<double> dx) {
    rhs(x, u_row, dx);
  };

  const std::size_t n = x0.size();
  Trajectory traj;
  traj.times.assign(times.begin(), times.end());
  traj.states = Matrix(times.size(), n);
  traj.inputs = inputs;

  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> k1(n), k2(n), k3(n), k4(n), y(n);
  for (std::size_t i = 0; i < n; ++i) traj.states(0, i) = x[i];

  for (std::size_t k = 1; k < times.size(); ++k) {
    const double h = (times[k] - times[k - 1]) / substeps;
    if (!(h > 0.0)) throw std::invalid_argument("sample times must be strictly increasing");
    u_row = inputs.row(k - 1);
    for (int s = 0; s < substeps; ++s) reference_step(frozen, x, h, k1, k2, k3, k4, y);
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(x[i]))
        throw DivergenceError("simulation diverged at sample", k);
      traj.states(k, i) = x[i];
    }
  }
  return traj;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) {
    // Trim surrounding blanks so hand-edited files parse.
    const auto begin = field.find_first_not_of(" \t\r");
    const auto end = field.find_last_not_of(" \t\r");
    fields.push_back(begin == std::string::npos ? "" : field.substr(begin, end - begin + 1));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_value(const std::string& text, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw FormatError("cannot parse value '" + text + "'", line_no);
  }
}

}  // namespace

Trajectory load_csv(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open " + path.string());

  std::string line;
  std::size_t line_no = 0;

  // Leading '#' lines carry provenance comments.
  do {
    if (!std::getline(file, line)) throw FormatError("missing header", line_no + 1);
    ++line_no;
  } while (!line.empty() && line[0] == '#');

  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "t")
    throw FormatError("header must start with column 't'", line_no);

  std::size_t n = 0, m = 0, p = 0;
  enum class Role { state, input, param };
  std::vector<Role> roles;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (name.rfind('x', 0) == 0) {
      if (m > 0 || p > 0) throw FormatError("state columns must precede inputs and params", line_no);
      roles.push_back(Role::state);
      ++n;
    } else if (name.rfind('u', 0) == 0) {
      if (p > 0) throw FormatError("input columns must precede params", line_no);
      roles.push_back(Role::input);
      ++m;
    } else if (name.rfind('p', 0) == 0) {
      roles.push_back(Role::param);
      ++p;
    } else {
      throw FormatError("unknown column '" + name + "' (expected x*/u*/p*)", line_no);
    }
  }
  if (n == 0) throw FormatError("no state columns", line_no);

  std::vector<double> times;
  std::vector<double> flat_states, flat_inputs;
  std::vector<double> params(p, 0.0);
  bool first_row = true;

  while (std::getline(file, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw FormatError("expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()),
                        line_no);
    const double t = parse_value(fields[0], line_no);
    if (!std::isfinite(t)) throw FormatError("non-finite time", line_no);
    if (!times.empty() && !(t > times.back()))
      throw FormatError("sample times must be strictly increasing", line_no);
    times.push_back(t);

    std::size_t pi = 0;
    for (std::size_t c = 1; c < fields.size(); ++c) {
      const double v = parse_value(fields[c], line_no);
      if (!std::isfinite(v)) throw FormatError("non-finite value in column " + header[c], line_no);
      switch (roles[c - 1]) {
        case Role::state:
          flat_states.push_back(v);
          break;
        case Role::input:
          flat_inputs.push_back(v);
          break;
        case Role::param:
          if (first_row) {
            params[pi] = v;
          } else if (v != params[pi]) {
            throw FormatError("parameter column " + header[c] + " is not constant", line_no);
          }
          ++pi;
          break;
      }
    }
    first_row = false;
  }
  if (times.empty()) throw FormatError("file has no data rows", line_no);

  Trajectory traj;
  traj.times = std::move(times);
  traj.states = Matrix(traj.times.size(), n);
  std::copy(flat_states.begin(), flat_states.end(), traj.states.data());
  if (m > 0) {
    traj.inputs = Matrix(traj.times.size(), m);
    std::copy(flat_inputs.begin(), flat_inputs.end(), traj.inputs.data());
  }
  traj.params = std::move(params);
  traj.validate();
  return traj;
}

void save_csv(const Trajectory& traj, const std::filesystem::path& path,
              const std::string& comment) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open " + path.string() + " for writing");

  if (!comment.empty()) {
    std::istringstream lines(comment);
    std::string line;
    while (std::getline(lines, line)) file << "# " << line << "\n";
  }

  const std::size_t n = traj.state_dim(), m = traj.input_dim(), p = traj.param_dim();
  file << "t";
  for (std::size_t i = 0; i < n; ++i) file << ",x" << i + 1;
  for (std::size_t i = 0; i < m; ++i) file << ",u" << i + 1;
  for (std::size_t i = 0; i < p; ++i) file << ",p" << i + 1;
  file << "\n";

  char buf[40];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    file << buf;
  };
  for (std::size_t k = 0; k < traj.num_samples(); ++k) {
    emit(traj.times[k]);
    for (std::size_t i = 0; i < n; ++i) {
      file << ",";
      emit(traj.states(k, i));
    }
    for (std::size_t i = 0; i < m; ++i) {
      file << ",";
      emit(traj.inputs(k, i));
    }
    for (std::size_t i = 0; i < p; ++i) {
      file << ",";
      emit(traj.params[i]);
    }
    file << "\n";
  }
  if (!file) throw std::runtime_error("write to " + path.string() + " failed");
}

}  // namespace rksindy
