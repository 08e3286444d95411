#pragma once

// Panel CSV format: the first row holds one label per unit, every further row
// is one time point (T x N on disk, N x T in memory). Empty cells and the
// tokens NA, NaN and nan count as missing.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "splash/errors.hpp"
#include "splash/simulate.hpp"

namespace splash::cli {

/// Malformed input; row and column are 1-based positions in the file.
class ParseError : public SplashError {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t col)
      : SplashError(what), row_(row), col_(col) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

struct MissingCell {
  std::size_t row;  // file row, 1-based (the header is row 1)
  std::size_t col;  // 1-based
};

/// Missing values without interpolation enabled.
class MissingValuesError : public SplashError {
 public:
  MissingValuesError(const std::string& what, std::vector<MissingCell> cells)
      : SplashError(what), cells_(std::move(cells)) {}
  const std::vector<MissingCell>& cells() const noexcept { return cells_; }

 private:
  std::vector<MissingCell> cells_;
};

struct PanelReadOptions {
  /// Fill gaps by linear interpolation in time per unit; leading and
  /// trailing gaps take the nearest observed value.
  bool interpolate = false;
};

Panel parse_panel_csv(std::istream& in, const PanelReadOptions& opts = {});
Panel read_panel_csv(const std::filesystem::path& file, const PanelReadOptions& opts = {});

void write_panel_csv(std::ostream& out, const Panel& p);
void write_panel_csv(const std::filesystem::path& file, const Panel& p);

/// Shortest decimal string that reads back to the same double.
std::string format_double(double v);

}  // namespace splash::cli
