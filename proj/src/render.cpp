#include "entroheat/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "entroheat/codec.hpp"
#include "entroheat/error.hpp"

namespace entroheat {

namespace {

constexpr std::string_view kAnsiReset = "\x1b[0m";
constexpr std::string_view kAnsiUnderline = "\x1b[4m";

// Approximate xterm rendering of the eight basic background colors 40..47.
constexpr std::array<Rgb, 8> kBasicColors{{{0, 0, 0},
                                           {205, 0, 0},
                                           {0, 205, 0},
                                           {205, 205, 0},
                                           {0, 0, 238},
                                           {205, 0, 205},
                                           {0, 205, 205},
                                           {229, 229, 229}}};

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

int squared_distance(Rgb a, Rgb b) {
  const int dr = a.r - b.r;
  const int dg = a.g - b.g;
  const int db = a.b - b.b;
  return dr * dr + dg * dg + db * db;
}

/// For each token (0-based), the rank (0 = best) of the first hotspot in
/// report order that covers it, or -1.
std::vector<int> hotspot_membership(const HotspotReport& report, std::size_t n) {
  std::vector<int> owner(n, -1);
  for (std::size_t h = 0; h < report.hotspots.size(); ++h) {
    const auto& spot = report.hotspots[h];
    for (std::size_t t = spot.start; t <= spot.end && t <= n; ++t) {
      if (owner[t - 1] < 0) owner[t - 1] = static_cast<int>(h);
    }
  }
  return owner;
}

bool dark(Rgb c) { return 0.2126 * c.r + 0.7152 * c.g + 0.0722 * c.b < 128.0; }

std::string render_ansi(const Transcript& t, const HotspotReport& report, const RenderSpec& spec) {
  const auto owner = hotspot_membership(report, t.size());
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double shade = report.shading[i];
    std::string codes;
    if (shade > 0.0) {
      if (spec.ansi_truecolor) {
        const Rgb c = palette_color(spec.palette, shade);
        codes += "\x1b[48;2;" + std::to_string(c.r) + ";" + std::to_string(c.g) + ";" +
                 std::to_string(c.b) + "m";
      } else {
        const auto stops = spec.palette.size();
        const auto stop = static_cast<std::size_t>(
            std::lround(std::clamp(shade, 0.0, 1.0) * static_cast<double>(stops - 1)));
        const Rgb target = spec.palette[stop];
        std::size_t best = 0;
        for (std::size_t c = 1; c < kBasicColors.size(); ++c) {
          if (squared_distance(kBasicColors[c], target) <
              squared_distance(kBasicColors[best], target)) {
            best = c;
          }
        }
        codes += "\x1b[" + std::to_string(40 + best) + "m";
      }
    }
    if (spec.hotspot_outline && owner[i] >= 0) codes += kAnsiUnderline;
    if (codes.empty()) {
      out += t.tokens[i].chosen_text;
    } else {
      out += codes;
      out += t.tokens[i].chosen_text;
      out += kAnsiReset;
    }
  }
  out += kAnsiReset;
  return out;
}

std::string script_safe(std::string json_text) {
  std::string out;
  out.reserve(json_text.size());
  for (std::size_t i = 0; i < json_text.size(); ++i) {
    if (json_text[i] == '<' && i + 1 < json_text.size() && json_text[i + 1] == '/') {
      out += "<\\/";
      ++i;
    } else {
      out += json_text[i];
    }
  }
  return out;
}

constexpr std::string_view kHtmlStyle = R"(
body { font-family: system-ui, sans-serif; margin: 1.5em; color: #222; }
header { margin-bottom: 1em; }
header dl { display: grid; grid-template-columns: max-content auto; gap: 0.2em 1em; margin: 0; }
header dt { font-weight: 600; }
.panels { display: flex; gap: 1.5em; align-items: flex-start; }
.panel { flex: 1 1 50%; min-width: 0; border: 1px solid #ccc; padding: 0.75em; }
.panel h2 { font-size: 1em; margin: 0 0 0.5em 0; }
.panel img { max-width: 100%; height: auto; }
pre.transcript { white-space: pre-wrap; word-wrap: break-word; font-family: ui-monospace, monospace; line-height: 1.6; margin: 0; }
.hotspot { border-radius: 2px; }
table.hotspots { border-collapse: collapse; margin-top: 0.5em; }
table.hotspots td, table.hotspots th { border: 1px solid #ccc; padding: 0.2em 0.6em; text-align: right; }
)";

std::string render_html(const Transcript& t, const HotspotReport& report, const RenderSpec& spec) {
  const auto owner = hotspot_membership(report, t.size());
  const Rgb outline = spec.palette.back();
  std::ostringstream out;

  std::string title = "Entropy heatmap";
  if (auto it = t.source_meta.find("image"); it != t.source_meta.end()) {
    title += " - " + it->second;
  }
  out << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>"
      << html_escape(title) << "</title>\n<style>" << kHtmlStyle << "</style>\n</head>\n<body>\n";

  out << "<header>\n<h1>" << html_escape(title) << "</h1>\n<dl>\n";
  for (const auto& [key, value] : t.source_meta) {
    out << "<dt>" << html_escape(key) << "</dt><dd>" << html_escape(value) << "</dd>\n";
  }
  out << "<dt>tokens</dt><dd>" << t.size() << "</dd>\n";
  out << "<dt>window W</dt><dd>" << report.window_length << "</dd>\n";
  out << "<dt>selection</dt><dd>" << strategy_name(report.strategy.kind);
  if (report.strategy.kind == SelectionKind::kRank) {
    out << " (M = " << report.strategy.m
        << (report.suppress_overlap ? ", overlap suppressed" : ", overlap allowed") << ")";
  } else {
    out << " (alpha = " << format_fixed(report.strategy.alpha, 1) << ")";
  }
  out << "</dd>\n<dt>review budget</dt><dd>" << format_fixed(100.0 * report.budget_fraction, 1)
      << "% of tokens</dd>\n</dl>\n";
  if (spec.include_scores && !report.hotspots.empty()) {
    out << "<table class=\"hotspots\">\n<tr><th>#</th><th>tokens</th><th>mean entropy "
           "(bits)</th></tr>\n";
    for (std::size_t h = 0; h < report.hotspots.size(); ++h) {
      const auto& s = report.hotspots[h];
      out << "<tr><td>" << h + 1 << "</td><td>" << s.start << "&ndash;" << s.end << "</td><td>"
          << format_fixed(s.score, 4) << "</td></tr>\n";
    }
    out << "</table>\n";
  }
  out << "</header>\n<div class=\"panels\">\n";

  out << "<section class=\"panel image-panel\">\n<h2>Source image</h2>\n";
  if (spec.image && !spec.image->bytes.empty()) {
    out << "<img src=\"data:" << html_escape(spec.image->mime_type) << ";base64,"
        << base64_encode(spec.image->bytes) << "\" alt=\"" << html_escape(spec.image->label)
        << "\">\n";
  } else {
    out << "<p class=\"missing\">No source image embedded.</p>\n";
  }
  out << "</section>\n";

  out << "<section class=\"panel text-panel\">\n<h2>Transcript</h2>\n<pre class=\"transcript\">";
  int open_group = -1;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const int group = spec.hotspot_outline ? owner[i] : -1;
    if (group != open_group) {
      if (open_group >= 0) out << "</span>";
      if (group >= 0) {
        const auto& s = report.hotspots[static_cast<std::size_t>(group)];
        out << "<span class=\"hotspot\" data-hotspot=\"" << group + 1 << "\" data-score=\""
            << format_fixed(s.score, 4) << "\" style=\"outline:2px solid " << to_hex(outline)
            << "\">";
      }
      open_group = group;
    }
    const double shade = report.shading[i];
    const Rgb bg = palette_color(spec.palette, shade);
    out << "<span class=\"tok\" data-i=\"" << i + 1 << "\" title=\"#" << i + 1 << " shade "
        << format_fixed(shade, 3) << "\" style=\"background:" << to_hex(bg);
    if (dark(bg)) out << ";color:#ffffff";
    out << "\">" << html_escape(t.tokens[i].chosen_text) << "</span>";
  }
  if (open_group >= 0) out << "</span>";
  out << "</pre>\n</section>\n</div>\n";

  out << "<script type=\"application/json\" id=\"hotspot-report\">"
      << script_safe(to_json(report).dump()) << "</script>\n</body>\n</html>\n";
  return out.str();
}

std::string render_latex(const Transcript& t, const HotspotReport& report,
                         const RenderSpec& spec) {
  const auto owner = hotspot_membership(report, t.size());

  std::string header;
  header += "\\usepackage{xcolor}\n\\usepackage{xfp}\n";
  header += "\\definecolor{entrohot}{HTML}{" + to_hex(spec.palette.back()).substr(1) + "}\n";
  header += latex_highlight_macro();
  if (spec.include_scores) {
    for (std::size_t h = 0; h < report.hotspots.size(); ++h) {
      const auto& s = report.hotspots[h];
      header += "% hotspot " + std::to_string(h + 1) + ": tokens " + std::to_string(s.start) +
                "-" + std::to_string(s.end) + ", mean entropy " + format_fixed(s.score, 4) +
                " bits\n";
    }
  }

  const std::string joined = joined_token_text(t);
  const std::size_t doc_pos = joined.find("\\begin{document}");
  const bool standalone = doc_pos == std::string::npos;
  // Token whose text holds the start of \begin{document}: the preamble
  // additions go right before it.
  std::size_t inject_before = t.size();
  if (!standalone) {
    std::size_t offset = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const std::size_t len = t.tokens[i].chosen_text.size();
      if (doc_pos < offset + len) {
        inject_before = i;
        break;
      }
      offset += len;
    }
  }

  std::string out = "% Entropy heatmap overlay generated by entroheat.\n";
  if (standalone) {
    out += "\\documentclass{article}\n\\usepackage{amsmath,amssymb}\n";
    out += header;
    out += "\\begin{document}\n";
  }
  out += "%<entroheat:transcript>\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i == inject_before) {
      out += "%<entroheat:preamble>\n" + header + "%</entroheat:preamble>\n";
    }
    const std::string& text = t.tokens[i].chosen_text;
    if (owner[i] < 0) {
      out += text;
      continue;
    }
    if (spec.latex_trust) {
      out += "\\entrohl{" + format_fixed(report.shading[i], 3) + "}{" + text + "}";
      continue;
    }
    // Keep surrounding blanks and line breaks outside the box.
    const auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
    std::size_t b = 0;
    std::size_t e = text.size();
    while (b < e && is_ws(text[b])) ++b;
    while (e > b && is_ws(text[e - 1])) --e;
    if (b == e) {
      out += text;
      continue;
    }
    out += text.substr(0, b);
    out += "\\entrohl{" + format_fixed(report.shading[i], 3) + "}{" +
           latex_escape(std::string_view(text).substr(b, e - b)) + "}";
    out += text.substr(e);
  }
  out += "\n%</entroheat:transcript>\n";
  if (standalone) out += "\\end{document}\n";
  return out;
}

}  // namespace

std::vector<Rgb> RenderSpec::default_palette() {
  return {{0xff, 0xff, 0xff}, {0xff, 0xd7, 0x00}, {0xd7, 0x1e, 0x1e}};
}

Rgb parse_hex_color(std::string_view text) {
  if (!text.empty() && text.front() == '#') text.remove_prefix(1);
  if (text.size() != 6) throw ValidationError("bad color \"" + std::string(text) + "\"");
  std::array<int, 6> d{};
  for (std::size_t i = 0; i < 6; ++i) {
    d[i] = hex_digit(text[i]);
    if (d[i] < 0) throw ValidationError("bad color \"" + std::string(text) + "\"");
  }
  return {static_cast<std::uint8_t>(d[0] * 16 + d[1]), static_cast<std::uint8_t>(d[2] * 16 + d[3]),
          static_cast<std::uint8_t>(d[4] * 16 + d[5])};
}

std::string to_hex(Rgb color) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", color.r, color.g, color.b);
  return buf;
}

Rgb palette_color(const std::vector<Rgb>& palette, double shade) {
  if (palette.size() < 2) throw ValidationError("palette needs at least two color stops");
  const double s = std::clamp(std::isfinite(shade) ? shade : 0.0, 0.0, 1.0);
  const auto segments = palette.size() - 1;
  const double pos = s * static_cast<double>(segments);
  const auto seg = std::min(static_cast<std::size_t>(pos), segments - 1);
  const double f = pos - static_cast<double>(seg);
  const Rgb a = palette[seg];
  const Rgb b = palette[seg + 1];
  const auto mix = [f](std::uint8_t x, std::uint8_t y) {
    return static_cast<std::uint8_t>(std::lround(x + (static_cast<double>(y) - x) * f));
  };
  return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

std::string latex_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\textbackslash{}"; break;
      case '{': out += "\\{"; break;
      case '}': out += "\\}"; break;
      case '%': out += "\\%"; break;
      case '$': out += "\\$"; break;
      case '#': out += "\\#"; break;
      case '_': out += "\\_"; break;
      case '^': out += "\\textasciicircum{}"; break;
      case '&': out += "\\&"; break;
      case '~': out += "\\textasciitilde{}"; break;
      default: out += c;
    }
  }
  return out;
}

std::string html_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string_view latex_highlight_macro() {
  return "% \\entrohl{<shade in [0,1]>}{<text>}: box the text, tinted from white\n"
         "% (shade 0) to the entrohot color (shade 1).\n"
         "\\newcommand{\\entrohl}[2]{{\\setlength{\\fboxsep}{1pt}%\n"
         "\\colorbox{entrohot!\\fpeval{round(100*(#1))}!white}{\\strut #2}}}\n";
}

std::string render(const Transcript& transcript, const HotspotReport& report,
                   const RenderSpec& spec) {
  if (report.shading.size() != transcript.size()) {
    throw StructuralError("render: shading has " + std::to_string(report.shading.size()) +
                          " values for " + std::to_string(transcript.size()) + " tokens");
  }
  if (spec.palette.size() < 2) throw ValidationError("palette needs at least two color stops");
  switch (spec.mode) {
    case RenderMode::kAnsi: return render_ansi(transcript, report, spec);
    case RenderMode::kHtml: return render_html(transcript, report, spec);
    case RenderMode::kLatex: return render_latex(transcript, report, spec);
  }
  return {};
}

RenderMode parse_render_mode(std::string_view name) {
  if (name == "ansi") return RenderMode::kAnsi;
  if (name == "html") return RenderMode::kHtml;
  if (name == "latex" || name == "tex") return RenderMode::kLatex;
  throw UsageError("unknown render mode \"" + std::string(name) + "\" (ansi, html, latex)");
}

std::string_view file_suffix(RenderMode mode) {
  switch (mode) {
    case RenderMode::kAnsi: return ".heatmap.ansi";
    case RenderMode::kHtml: return ".heatmap.html";
    case RenderMode::kLatex: return ".heatmap.tex";
  }
  return "";
}

}  // namespace entroheat
