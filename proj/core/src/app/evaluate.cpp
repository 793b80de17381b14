#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "chromex/baselines.hpp"
#include "chromex/error.hpp"
#include "chromex/eval.hpp"
#include "internal/files.hpp"
#include "internal/parallel.hpp"

namespace chromex {

namespace {

bool applies(Method m, ColormapKind kind) {
  if (m == Method::palette) return kind == ColormapKind::discrete;
  if (m == Method::sequence) return kind == ColormapKind::continuous;
  return true;
}

Colormap run_method(Method m, const RgbImage& img, const Colormap& truth, const Extractor* cnn) {
  switch (m) {
    case Method::cnn: return cnn->extract(img).colormap;
    case Method::palette: return palette_extract(img);
    case Method::sequence: return sequence_extract(img);
    case Method::truth: return truth;
  }
  throw Error(ErrorCode::invalid_argument, "unknown method");
}

void score(EvalRecord& rec, Method m, const Colormap& truth, const Colormap& out) {
  const bool orientation_free = (m == Method::palette || m == Method::sequence) && out.is_continuous();
  const DtwResult d = orientation_free ? dtw_oriented(truth, out) : dtw_distance(truth, out);
  rec.predicted_kind = out.kind;
  rec.d_dtw_raw = d.raw;
  rec.d_dtw_norm = d.normalized;
}

struct Accumulator {
  std::vector<double> norm;
  double raw_sum = 0.0;
  std::size_t correct_kind = 0;
  std::size_t failures = 0;
};

GroupStats finish(const std::string& method, const std::string& group, const Accumulator& acc) {
  GroupStats g;
  g.method = method;
  g.group = group;
  g.n = acc.norm.size();
  g.failures = acc.failures;
  if (g.n == 0) return g;
  const double n = static_cast<double>(g.n);
  double sum = 0.0;
  for (const double v : acc.norm) sum += v;
  g.mean = sum / n;
  if (g.n > 1) {
    double ss = 0.0;
    for (const double v : acc.norm) ss += (v - g.mean) * (v - g.mean);
    g.stddev = std::sqrt(ss / (n - 1.0));
  }
  const double half = 1.959963984540054 * g.stddev / std::sqrt(n);
  g.ci_low = g.mean - half;
  g.ci_high = g.mean + half;
  g.mean_raw = acc.raw_sum / n;
  g.kind_accuracy = static_cast<double>(acc.correct_kind) / n;
  return g;
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

const GroupStats* EvalReport::find(std::string_view method, std::string_view group) const {
  for (const auto& g : groups) {
    if (g.method == method && g.group == group) return &g;
  }
  return nullptr;
}

EvalReport evaluate(const std::vector<ManifestRecord>& manifest, const std::vector<Method>& methods,
                    const Extractor* cnn, int jobs) {
  if (methods.empty()) throw Error(ErrorCode::invalid_argument, "no evaluation methods given");
  if (!cnn && std::find(methods.begin(), methods.end(), Method::cnn) != methods.end()) {
    throw Error(ErrorCode::invalid_argument, "the cnn method requires weights");
  }
  std::vector<const ManifestRecord*> test;
  for (const auto& r : manifest) {
    if (r.split == Split::test) test.push_back(&r);
  }
  if (test.empty()) throw Error(ErrorCode::empty_input, "empty test split");

  std::vector<std::vector<EvalRecord>> per_record(test.size());
  internal::parallel_for(test.size(), jobs, [&](std::size_t i) {
    const ManifestRecord& r = *test[i];
    const Colormap& truth = record_colormap(r);
    const RgbImage img = read_png(r.image_path);
    for (const Method m : methods) {
      if (!applies(m, truth.kind)) continue;
      EvalRecord rec;
      rec.id = r.id;
      rec.chart_type = r.chart_type;
      rec.kind = truth.kind;
      rec.method = std::string(method_name(m));
      try {
        score(rec, m, truth, run_method(m, img, truth, cnn));
      } catch (const Error& e) {
        rec.error = e.what();
      }
      per_record[i].push_back(std::move(rec));
    }
  });
  std::vector<EvalRecord> records;
  for (auto& v : per_record) {
    for (auto& rec : v) records.push_back(std::move(rec));
  }
  return summarize(std::move(records));
}

EvalReport summarize(std::vector<EvalRecord> records) {
  EvalReport report;
  std::vector<std::string> methods;
  std::set<std::string> charts;
  for (const auto& r : records) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    charts.insert(r.chart_type);
  }
  std::vector<std::string> groups{"overall", "kind=discrete", "kind=continuous"};
  for (const auto& c : charts) groups.push_back("chart=" + c);

  std::map<std::pair<std::string, std::string>, Accumulator> acc;
  for (const auto& r : records) {
    const std::string keys[] = {"overall", "kind=" + std::string(kind_name(r.kind)), "chart=" + r.chart_type};
    for (const auto& key : keys) {
      Accumulator& a = acc[{r.method, key}];
      if (!r.error.empty()) {
        ++a.failures;
        continue;
      }
      a.norm.push_back(r.d_dtw_norm);
      a.raw_sum += r.d_dtw_raw;
      if (r.predicted_kind == r.kind) ++a.correct_kind;
    }
  }
  for (const auto& group : groups) {
    for (const auto& method : methods) {
      const auto it = acc.find({method, group});
      if (it != acc.end()) report.groups.push_back(finish(method, group, it->second));
    }
  }
  for (const auto& group : groups) {
    for (std::size_t i = 0; i < methods.size(); ++i) {
      for (std::size_t j = i + 1; j < methods.size(); ++j) {
        const GroupStats* a = report.find(methods[i], group);
        const GroupStats* b = report.find(methods[j], group);
        if (!a || !b || a->n < 2 || b->n < 2) continue;
        const double va = a->stddev * a->stddev / static_cast<double>(a->n);
        const double vb = b->stddev * b->stddev / static_cast<double>(b->n);
        if (va + vb <= 0.0) continue;
        WelchTest w{group, a->method, b->method, (a->mean - b->mean) / std::sqrt(va + vb), 0.0};
        w.df = (va + vb) * (va + vb) /
               (va * va / static_cast<double>(a->n - 1) + vb * vb / static_cast<double>(b->n - 1));
        report.tests.push_back(w);
      }
    }
  }
  report.records = std::move(records);
  return report;
}

void write_eval_json(const std::filesystem::path& path, const EvalReport& report) {
  nlohmann::ordered_json j;
  j["records"] = report.records.size();
  auto& groups = j["groups"] = nlohmann::ordered_json::array();
  for (const auto& g : report.groups) {
    groups.push_back({{"method", g.method},
                      {"group", g.group},
                      {"n", g.n},
                      {"failures", g.failures},
                      {"mean", g.mean},
                      {"stddev", g.stddev},
                      {"ci95", {g.ci_low, g.ci_high}},
                      {"mean_raw", g.mean_raw},
                      {"kind_accuracy", g.kind_accuracy}});
  }
  auto& tests = j["welch"] = nlohmann::ordered_json::array();
  for (const auto& t : report.tests) {
    tests.push_back({{"group", t.group}, {"a", t.method_a}, {"b", t.method_b}, {"t", t.t}, {"df", t.df}});
  }
  internal::write_text_file(path, j.dump(2) + "\n");
}

void write_eval_csv(const std::filesystem::path& path, const EvalReport& report) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "id,chart_type,kind,method,predicted_kind,d_dtw_raw,d_dtw_norm,error\n";
  for (const auto& r : report.records) {
    os << csv_field(r.id) << ',' << csv_field(r.chart_type) << ',' << kind_name(r.kind) << ','
       << r.method << ',' << (r.predicted_kind ? kind_name(*r.predicted_kind) : "") << ',';
    if (r.error.empty()) {
      os << r.d_dtw_raw << ',' << r.d_dtw_norm << ",\n";
    } else {
      os << ",," << csv_field(r.error) << '\n';
    }
  }
  internal::write_text_file(path, os.str());
}

std::string eval_markdown(const EvalReport& report) {
  std::vector<std::string> methods;
  std::vector<std::string> groups;
  for (const auto& g : report.groups) {
    if (std::find(methods.begin(), methods.end(), g.method) == methods.end()) methods.push_back(g.method);
    if (std::find(groups.begin(), groups.end(), g.group) == groups.end()) groups.push_back(g.group);
  }
  std::string out = "| group |";
  for (const auto& m : methods) out += " " + m + " |";
  out += "\n|---|";
  for (std::size_t i = 0; i < methods.size(); ++i) out += "---|";
  out += '\n';
  for (const auto& group : groups) {
    out += "| " + group + " |";
    for (const auto& m : methods) {
      const GroupStats* g = report.find(m, group);
      if (!g || g->n == 0) {
        out += " - |";
      } else {
        out += " " + fixed(g->mean, 4) + " ± " + fixed(g->ci_high - g->mean, 4) + " (n=" +
               std::to_string(g->n) + ") |";
      }
    }
    out += '\n';
  }
  return out;
}

void write_eval_markdown(const std::filesystem::path& path, const EvalReport& report) {
  internal::write_text_file(path, eval_markdown(report));
}

}  // namespace chromex
