#include "csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "sgdlab/errors.hpp"

namespace sgdlab::cli {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string render_csv(std::span<const LabeledCurve> curves) {
  std::string out = "run_id,series,t,value,stderr,replicates\n";
  for (const LabeledCurve& lc : curves) {
    const RiskCurve& c = *lc.curve;
    const bool has_se = !is_deterministic(c.series) && c.stderrs.size() == c.size();
    const std::string prefix = lc.run_id + "," + std::string(series_name(c.series)) + ",";
    for (std::size_t i = 0; i < c.size(); ++i) {
      out += prefix;
      out += std::to_string(c.checkpoints[i]);
      out += ',';
      out += format_double(c.values[i]);
      out += ',';
      if (has_se) out += format_double(c.stderrs[i]);
      out += ',';
      out += std::to_string(c.replicates);
      out += '\n';
    }
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace sgdlab::cli
