#include "nrst/errors.hpp"

#include <sstream>

namespace nrst {

namespace {

std::string describe_divergence(const std::vector<double>& x, double value) {
  std::ostringstream os;
  os << "potential diverged (V = " << value << ") at x = [";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i > 0) os << ", ";
    if (i == 8 && x.size() > 9) {
      os << "... (" << x.size() << " coordinates)";
      break;
    }
    os << x[i];
  }
  os << "]";
  return os.str();
}

std::string describe_unknown(const std::string& name, const std::vector<std::string>& available) {
  std::string msg = "unknown model '" + name + "'; available:";
  for (const auto& a : available) msg += " " + a;
  return msg;
}

}  // namespace

DivergedPotential::DivergedPotential(std::vector<double> x, double value)
    : std::runtime_error(describe_divergence(x, value)), x_(std::move(x)), value_(value) {}

UnknownModel::UnknownModel(const std::string& name, const std::vector<std::string>& available)
    : InvalidArgument(describe_unknown(name, available)) {}

}  // namespace nrst
