#include "rwt/annotation/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rwt/annotation/aggregate.hpp"
#include "rwt/datamodel/votes.hpp"

namespace rwt::annotation {

namespace {

void classify(AgreementBreakdown& b, int winner, int total, bool ambiguous) {
  if (ambiguous) {
    ++b.ambiguous;
  } else if (winner == total) {
    ++b.unanimous;
  } else if (2 * winner > total) {
    ++b.majority_3_4;
  } else {
    ++b.plurality;
  }
}

std::string pct(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * f);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  return out;
}

void write_bar_svg(const std::filesystem::path& path, const std::string& title,
                   const std::vector<std::pair<std::string, std::size_t>>& bars) {
  const int width = 900, height = 420, left = 60, bottom = 150, top = 40;
  std::size_t max_v = 1;
  for (const auto& [_, v] : bars) max_v = std::max(max_v, v);
  const double slot = static_cast<double>(width - left - 20) / std::max<std::size_t>(bars.size(), 1);
  std::ofstream out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << title << "</text>\n";
  const int plot_h = height - bottom - top;
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double bh = plot_h * static_cast<double>(bars[i].second) / max_v;
    const double x = left + i * slot + slot * 0.1;
    out << "<rect x=\"" << x << "\" y=\"" << top + plot_h - bh << "\" width=\""
        << slot * 0.8 << "\" height=\"" << bh << "\" fill=\"#4a7bb7\"/>\n";
    out << "<text transform=\"translate(" << x + slot * 0.4 << "," << top + plot_h + 8
        << ") rotate(60)\">" << bars[i].first << "</text>\n";
  }
  out << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << width - 20
      << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << left - 8 << "\" y=\"" << top + 4 << "\" text-anchor=\"end\">"
      << max_v << "</text>\n</svg>\n";
}

// Log-log scatter; points with zero abscissa or count are skipped.
void write_loglog_svg(const std::filesystem::path& path, const std::string& title,
                      const std::map<int, std::size_t>& hist) {
  const int width = 600, height = 420, left = 60, right = 20, top = 40, bottom = 50;
  double max_x = 1.0, max_y = 1.0;
  for (const auto& [k, v] : hist) {
    if (k <= 0 || v == 0) continue;
    max_x = std::max(max_x, std::log10(static_cast<double>(k)));
    max_y = std::max(max_y, std::log10(static_cast<double>(v)));
  }
  std::ofstream out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << title << "</text>\n";
  const double pw = width - left - right, ph = height - top - bottom;
  for (const auto& [k, v] : hist) {
    if (k <= 0 || v == 0) continue;
    const double x = left + pw * std::log10(static_cast<double>(k)) / max_x;
    const double y = top + ph - ph * std::log10(static_cast<double>(v)) / max_y;
    out << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"3\" fill=\"#b7554a\"/>\n";
  }
  out << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw
      << "\" y2=\"" << top + ph << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << top + ph << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\">log10(text regions per image)</text>\n"
      << "<text transform=\"translate(16," << top + ph / 2
      << ") rotate(-90)\" text-anchor=\"middle\">log10(images)</text>\n</svg>\n";
}

}  // namespace

double AgreementBreakdown::fraction(std::size_t count) const {
  const auto t = total();
  return t == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(t);
}

DatasetStats dataset_stats(const DatasetManifest& manifest,
                           std::span<const VoteRecord> votes) {
  DatasetStats s;
  std::map<std::string, std::size_t> by_cat;
  for (const auto& c : product_categories()) by_cat[c] = 0;

  const auto by_image = group_by_image({votes.begin(), votes.end()});
  AggregationConfig counting;
  counting.min_votes = 1;

  for (const auto& r : manifest) {
    ++s.total;
    ++by_cat[r.category];
    ++s.text_regions_histogram[r.n_text_regions];
    if (r.binary_class) {
      ++(*r.binary_class == BinaryClass::kPositive ? s.positives : s.negatives);
    }
    if (r.split) ++(*r.split == Split::kTrain ? s.train : s.val);

    auto it = by_image.find(r.image_id);
    if (it != by_image.end() && !it->second.empty()) {
      counting.expected_votes = std::max<int>(1, static_cast<int>(it->second.size()));
      const AggregatedLabel a = aggregate_votes(it->second, counting);
      classify(s.agreement, a.votes_for_winner, a.total_votes, a.ambiguous);
      ++s.winner_votes_histogram[a.votes_for_winner];
    } else if (r.aggregated && r.aggregated->total_votes > 0) {
      const auto& a = *r.aggregated;
      classify(s.agreement, a.votes_for_winner, a.total_votes, a.ambiguous);
      ++s.winner_votes_histogram[a.votes_for_winner];
    }
  }
  for (const auto& c : product_categories()) s.category_counts.emplace_back(c, by_cat[c]);
  return s;
}

std::string format_agreement_report(const DatasetStats& stats) {
  const auto& a = stats.agreement;
  std::ostringstream out;
  out << "images: " << stats.total << " (with votes: " << a.total() << ")\n"
      << "unanimous: " << a.unanimous << " (" << pct(a.fraction(a.unanimous)) << ")\n"
      << "majority (3-4 of 5): " << a.majority_3_4 << " ("
      << pct(a.fraction(a.majority_3_4)) << ")\n"
      << "plurality (2 of 5): " << a.plurality << " (" << pct(a.fraction(a.plurality))
      << ")\n"
      << "ambiguous: " << a.ambiguous << " (" << pct(a.fraction(a.ambiguous)) << ")\n";
  return out.str();
}

void write_stats(const DatasetStats& stats, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    auto out = open_out(out_dir / "categories.csv");
    out << "category,count\n";
    for (const auto& [c, n] : stats.category_counts) out << c << ',' << n << '\n';
  }
  {
    auto out = open_out(out_dir / "text_regions.csv");
    out << "n_text_regions,images\n";
    for (const auto& [k, n] : stats.text_regions_histogram) out << k << ',' << n << '\n';
  }
  {
    auto out = open_out(out_dir / "winner_votes.csv");
    out << "votes_for_winner,images\n";
    for (const auto& [k, n] : stats.winner_votes_histogram) out << k << ',' << n << '\n';
  }
  const auto& a = stats.agreement;
  {
    auto out = open_out(out_dir / "agreement.csv");
    out << "class,count,fraction\n";
    out.precision(10);
    out << "unanimous," << a.unanimous << ',' << a.fraction(a.unanimous) << '\n'
        << "majority_3_4," << a.majority_3_4 << ',' << a.fraction(a.majority_3_4) << '\n'
        << "plurality," << a.plurality << ',' << a.fraction(a.plurality) << '\n'
        << "ambiguous," << a.ambiguous << ',' << a.fraction(a.ambiguous) << '\n';
  }
  nlohmann::json j;
  j["total"] = stats.total;
  j["positives"] = stats.positives;
  j["negatives"] = stats.negatives;
  j["train"] = stats.train;
  j["val"] = stats.val;
  j["agreement"] = {{"unanimous", a.unanimous},
                    {"majority_3_4", a.majority_3_4},
                    {"plurality", a.plurality},
                    {"ambiguous", a.ambiguous}};
  for (const auto& [c, n] : stats.category_counts) j["categories"][c] = n;
  open_out(out_dir / "stats.json") << j.dump(2) << '\n';
  open_out(out_dir / "agreement.txt") << format_agreement_report(stats);

  auto sorted = stats.category_counts;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });
  write_bar_svg(out_dir / "categories.svg", "Images per product category", sorted);
  write_loglog_svg(out_dir / "text_regions_loglog.svg",
                   "Text regions per image (log-log)", stats.text_regions_histogram);
}

}  // namespace rwt::annotation
