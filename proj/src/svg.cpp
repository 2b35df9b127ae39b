#include "arvar/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>

namespace arvar {

namespace {

constexpr double kWidth = 480.0;
constexpr double kHeight = 320.0;
constexpr double kMargin = 48.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin); }
  double py(double y) const { return kHeight - kMargin - (y - y0) / (y1 - y0) * (kHeight - 2 * kMargin); }
};

void header(std::ostream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title << "</text>\n";
}

void axes(std::ostream& out, const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  out << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kWidth - 2 * kMargin
      << "\" height=\"" << kHeight - 2 * kMargin << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = f.x0 + (f.x1 - f.x0) * k / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
    out << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << num(kHeight - kMargin + 14)
        << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
    out << "<text x=\"" << num(kMargin - 4) << "\" y=\"" << num(f.py(yv) + 4)
        << "\" text-anchor=\"end\">" << num(yv) << "</text>\n";
  }
  out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">"
      << xlabel << "</text>\n";
  out << "<text x=\"14\" y=\"" << kHeight / 2 << "\" transform=\"rotate(-90 14 " << kHeight / 2
      << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
}

template <class Upper, class Lower>
void band(std::ostream& out, const Frame& f, const std::vector<double>& x, Upper up, Lower lo,
          const char* fill) {
  out << "<polygon fill=\"" << fill << "\" stroke=\"none\" points=\"";
  for (std::size_t k = 0; k < x.size(); ++k) out << num(f.px(x[k])) << ',' << num(f.py(up(k))) << ' ';
  for (std::size_t k = x.size(); k-- > 0;) out << num(f.px(x[k])) << ',' << num(f.py(lo(k))) << ' ';
  out << "\"/>\n";
}

void line(std::ostream& out, const Frame& f, const std::vector<double>& x,
          const std::vector<double>& y, const char* stroke) {
  out << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
  for (std::size_t k = 0; k < x.size(); ++k) out << num(f.px(x[k])) << ',' << num(f.py(y[k])) << ' ';
  out << "\"/>\n";
}

}  // namespace

void write_recovery_svg(std::ostream& out, const ExperimentReport& r) {
  header(out, to_string(r.dataset) + " / " + to_string(r.estimator));
  if (r.grid_x.empty()) {
    out << "</svg>\n";
    return;
  }
  double ymax = 0.0;
  for (std::size_t k = 0; k < r.grid_x.size(); ++k) {
    ymax = std::max({ymax, r.sigma_true[k], r.sigma_mean[k] + 2.0 * r.sigma_std[k]});
  }
  const Frame f{r.grid_x.front(), r.grid_x.back(), 0.0, std::max(ymax * 1.05, 1e-3)};
  const auto& m = r.sigma_mean;
  const auto& s = r.sigma_std;
  band(out, f, r.grid_x, [&](std::size_t k) { return m[k] + 2 * s[k]; },
       [&](std::size_t k) { return std::max(0.0, m[k] - 2 * s[k]); }, "#d9d9d9");
  band(out, f, r.grid_x, [&](std::size_t k) { return m[k] + s[k]; },
       [&](std::size_t k) { return std::max(0.0, m[k] - s[k]); }, "#a6a6a6");
  line(out, f, r.grid_x, r.sigma_true, "red");
  line(out, f, r.grid_x, r.sigma_mean, "black");
  axes(out, f, "x", "sigma");
  out << "</svg>\n";
}

void write_density_svg(std::ostream& out, const DensityMap& map) {
  header(out, "predicted vs true sigma");
  const Frame f{map.lo, map.hi, map.lo, map.hi};
  const double cell_w = (kWidth - 2 * kMargin) / static_cast<double>(map.bins);
  const double cell_h = (kHeight - 2 * kMargin) / static_cast<double>(map.bins);
  for (std::size_t c = 0; c < map.bins; ++c) {
    for (std::size_t r = 0; r < map.bins; ++r) {
      const double d = map.density[c * map.bins + r];
      if (d <= 0.0) continue;
      const int shade = 255 - static_cast<int>(d * 255.0);
      out << "<rect x=\"" << num(kMargin + c * cell_w) << "\" y=\""
          << num(kHeight - kMargin - (r + 1) * cell_h) << "\" width=\"" << num(cell_w)
          << "\" height=\"" << num(cell_h) << "\" fill=\"rgb(" << shade << ',' << shade
          << ",255)\"/>\n";
    }
  }
  out << "<line x1=\"" << num(f.px(map.lo)) << "\" y1=\"" << num(f.py(map.lo)) << "\" x2=\""
      << num(f.px(map.hi)) << "\" y2=\"" << num(f.py(map.hi)) << "\" stroke=\"red\"/>\n";
  axes(out, f, "predicted sigma", "true sigma");
  out << "</svg>\n";
}

}  // namespace arvar
