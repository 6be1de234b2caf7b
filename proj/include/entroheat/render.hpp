#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "entroheat/hotspot.hpp"
#include "entroheat/token_stream.hpp"

namespace entroheat {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  bool operator==(const Rgb&) const = default;
};

/// Parses "#rrggbb" or "rrggbb". Throws ValidationError otherwise.
Rgb parse_hex_color(std::string_view text);
std::string to_hex(Rgb color);

enum class RenderMode { kAnsi, kHtml, kLatex };

/// Image shown next to the transcript in the HTML report.
struct EmbeddedImage {
  std::string bytes;
  std::string mime_type;
  std::string label;
};

struct RenderSpec {
  RenderMode mode = RenderMode::kHtml;
  std::vector<Rgb> palette = default_palette();
  bool hotspot_outline = true;
  bool include_scores = false;
  // LaTeX: when false (safe), hotspot token text is escaped inside the
  // highlight macro; when true it is emitted raw.
  bool latex_trust = false;
  // ANSI: 24-bit color, or nearest-stop 8-color fallback.
  bool ansi_truecolor = true;
  std::optional<EmbeddedImage> image;

  static std::vector<Rgb> default_palette();  // white, yellow, red
};

/// Piecewise-linear interpolation along the palette, shade in [0,1].
Rgb palette_color(const std::vector<Rgb>& palette, double shade);

/// Escapes the LaTeX specials \ { } % $ # _ ^ & ~.
std::string latex_escape(std::string_view text);
std::string html_escape(std::string_view text);

/// Preamble lines defining \entrohl{<shade>}{<text>}.
std::string_view latex_highlight_macro();

/// Renders the shaded transcript. Throws StructuralError when the report's
/// shading length differs from the transcript length, and ValidationError
/// when the palette has fewer than two stops.
std::string render(const Transcript& transcript, const HotspotReport& report,
                   const RenderSpec& spec);

RenderMode parse_render_mode(std::string_view name);
std::string_view file_suffix(RenderMode mode);

}  // namespace entroheat
