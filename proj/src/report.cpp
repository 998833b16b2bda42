#include "deglab/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace deglab {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

// quote a CSV field when needed (commas/quotes appear in param_json)
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

}  // namespace

std::string csv_text(const std::vector<CsvRow>& rows) {
  std::string out = "experiment,param_json,value_name,value,reference,ratio\n";
  for (const CsvRow& r : rows) {
    out += csv_field(r.experiment);
    out += ',';
    out += csv_field(r.param_json);
    out += ',';
    out += csv_field(r.value_name);
    out += ',';
    out += format_double(r.value);
    out += ',';
    if (r.reference) out += format_double(*r.reference);
    out += ',';
    if (r.ratio) out += format_double(*r.ratio);
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path);
}

void validate_report(const nlohmann::json& report) {
  auto need = [&](const nlohmann::json& j, const char* key, const char* where) {
    if (!j.contains(key))
      throw std::logic_error(std::string("report schema: missing '") + key + "' in " + where);
  };
  need(report, "schema_version", "root");
  need(report, "tool", "root");
  need(report, "config", "root");
  need(report, "experiments", "root");
  need(report, "counts", "root");
  if (!report["schema_version"].is_number_integer())
    throw std::logic_error("report schema: schema_version must be an integer");
  need(report["tool"], "name", "tool");
  need(report["tool"], "version", "tool");
  const auto& counts = report["counts"];
  need(counts, "pass", "counts");
  need(counts, "fail", "counts");
  need(counts, "flagged", "counts");
  if (!report["experiments"].is_array())
    throw std::logic_error("report schema: experiments must be an array");
  int pass = 0, fail = 0, flagged = 0;
  for (const auto& e : report["experiments"]) {
    need(e, "index", "experiment");
    need(e, "kind", "experiment");
    need(e, "status", "experiment");
    need(e, "csv", "experiment");
    need(e, "wall_time_s", "experiment");
    need(e, "summary", "experiment");
    std::string status = e["status"].get<std::string>();
    if (status == "pass") ++pass;
    else if (status == "fail") ++fail;
    else if (status == "flagged") ++flagged;
    else throw std::logic_error("report schema: unknown status '" + status + "'");
  }
  if (counts["pass"].get<int>() != pass || counts["fail"].get<int>() != fail ||
      counts["flagged"].get<int>() != flagged)
    throw std::logic_error("report schema: counts do not match experiment statuses");
}

std::string plots_script_text() {
  return R"PY(#!/usr/bin/env python3
"""Render one PNG per CSV table in this directory.

Reads only the long-format CSVs (experiment,param_json,value_name,value,...).
Rows sharing a value_name become one series; the x axis is the parameter
"t" (or "c", or the first numeric parameter) from param_json.
"""
import csv
import json
import math
import os
import sys

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    sys.exit("matplotlib is required to draw the plots")


def x_key(params):
    for key in ("t", "c", "n", "s", "j", "axis", "trial"):
        if key in params and isinstance(params[key], (int, float)):
            return key, params[key]
    for key, val in sorted(params.items()):
        if isinstance(val, (int, float)):
            return key, val
    return None, None


def render(path):
    series = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            try:
                params = json.loads(row["param_json"]) if row["param_json"] else {}
            except json.JSONDecodeError:
                params = {}
            key, x = x_key(params)
            if key is None:
                continue
            y = float(row["value"])
            series.setdefault((row["value_name"], key), []).append((x, y))
    if not series:
        return
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for (name, key), pts in sorted(series.items()):
        pts.sort()
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        ax.plot(xs, ys, marker="o", markersize=3, linewidth=1, label=name)
        ax.set_xlabel(key)
    positive = [y for pts in series.values() for _, y in pts if y > 0]
    if positive and min(positive) > 0 and max(positive) / min(positive) > 50:
        ax.set_yscale("log")
    ax.legend(fontsize=7)
    ax.set_title(os.path.basename(path))
    fig.tight_layout()
    out = os.path.splitext(path)[0] + ".png"
    fig.savefig(out, dpi=130)
    plt.close(fig)
    print("wrote", out)


def main():
    base = os.path.dirname(os.path.abspath(__file__))
    for name in sorted(os.listdir(base)):
        if name.endswith(".csv"):
            render(os.path.join(base, name))


if __name__ == "__main__":
    main()
)PY";
}

}  // namespace deglab
