#include "interx/error.hpp"

#include <sstream>

namespace interx {

namespace {

std::string rank_message(const std::string& what, double condition,
                         const std::optional<std::string>& unit) {
  std::ostringstream os;
  os << what << " (condition estimate " << condition << ")";
  if (unit) os << " in unit " << *unit;
  return os.str();
}

}  // namespace

RankDeficient::RankDeficient(double condition, std::optional<std::string> unit,
                             const std::string& what)
    : Error(rank_message(what, condition, unit)), condition_(condition), unit_(std::move(unit)) {}

MissingColumn::MissingColumn(const std::string& column)
    : DataError("missing column '" + column + "'"), column_(column) {}

UnbalancedPanel::UnbalancedPanel(const std::string& unit, std::size_t expected,
                                 std::size_t found)
    : DataError("unbalanced panel: unit " + unit + " has " + std::to_string(found) +
                " periods, expected " + std::to_string(expected)),
      unit_(unit) {}

NonConstantH::NonConstantH(const std::string& unit, const std::string& column)
    : DataError("column '" + column + "' varies within unit " + unit), unit_(unit),
      column_(column) {}

NonFiniteValue::NonFiniteValue(std::size_t row, const std::string& column)
    : DataError("non-finite or unparsable value in row " + std::to_string(row) + ", column '" +
                column + "'"),
      row_(row) {}

ZeroDegreesOfFreedom::ZeroDegreesOfFreedom(const std::string& unit)
    : Error("zero residual degrees of freedom in unit " + unit), unit_(unit) {}

ConfigInvalid::ConfigInvalid(const std::string& field, const std::string& reason)
    : Error("invalid config at '" + field + "': " + reason), field_(field) {}

}  // namespace interx
