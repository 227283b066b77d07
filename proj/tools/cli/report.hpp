// Copyright 2026 The duet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DUET_TOOLS_REPORT_HPP_
#define DUET_TOOLS_REPORT_HPP_

#include <filesystem>
#include <string>
#include <vector>

namespace duet::cli {

/// Round-trip formatting ("%.17g") so rerunning a command reproduces its
/// CSV bytes exactly.
std::string format_real(double v);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(const std::vector<std::string>& cells);
  std::string str() const { return text_; }
  void save(const std::filesystem::path& path) const;

 private:
  std::size_t columns_;
  std::string text_;
};

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

enum class SeriesStyle { kLine, kPoints };

/// Minimal static chart: axes, tick labels, one polyline (or point cloud)
/// per series and a legend.
std::string render_svg_chart(const std::string& title, const std::string& x_label,
                             const std::string& y_label, const std::vector<Series>& series,
                             SeriesStyle style = SeriesStyle::kLine);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace duet::cli

#endif  // DUET_TOOLS_REPORT_HPP_
