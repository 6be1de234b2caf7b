#include "entroheat/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "entroheat/error.hpp"
#include "entroheat/pipeline.hpp"
#include "entroheat/render.hpp"
#include "entroheat/reprompt.hpp"

namespace entroheat::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

int code(ExitCode c) { return static_cast<int>(c); }

struct AnalysisFlags {
  std::ptrdiff_t window = 10;
  std::ptrdiff_t m = 3;
  std::string strategy = "rank";
  double alpha = 90.0;
  bool no_suppress = false;
  bool exclude_special = false;

  AnalysisOptions options() const {
    AnalysisOptions o;
    o.window = window;
    o.m = m;
    o.strategy = strategy == "percentile" ? SelectionKind::kPercentile : SelectionKind::kRank;
    o.alpha = alpha;
    o.suppress_overlap = !no_suppress;
    o.exclude_special = exclude_special;
    return o;
  }
};

struct RenderFlags {
  std::string mode = "html";
  std::string palette;
  std::string color = "auto";
  bool no_outline = false;
  bool scores = false;
  bool trust = false;
};

struct RequestFlags {
  std::string model = "gpt-4o";
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string auth_env = "OPENAI_API_KEY";
  int max_tokens = 4096;
  std::string prompts;
  std::string archive;
  bool live = false;
};

void add_analysis_flags(CLI::App* app, AnalysisFlags& f) {
  app->add_option("-W,--W,--window", f.window,
                  "Sliding-window length in tokens; presets 5, 10, 20, any W in [1, n] accepted")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("-M,--M,--top", f.m, "Number of windows reported by the rank strategy")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--strategy", f.strategy, "Hotspot selection: rank (top M) or percentile")
      ->check(CLI::IsMember({"rank", "percentile"}))
      ->capture_default_str();
  app->add_option("--alpha", f.alpha, "Percentile cutoff for the percentile strategy, in (0, 100)")
      ->check(CLI::Range(0.0, 100.0))
      ->capture_default_str();
  app->add_flag("--no-suppress", f.no_suppress,
                "Let rank selection return overlapping windows (suppression is on by default)");
  app->add_flag("--exclude-special", f.exclude_special,
                "Give newline and fence tokens zero entropy");
}

void add_render_flags(CLI::App* app, RenderFlags& f, bool mode_option) {
  if (mode_option) {
    app->add_option("--mode", f.mode, "Output format: html, latex or ansi")
        ->check(CLI::IsMember({"html", "latex", "ansi"}))
        ->capture_default_str();
  }
  app->add_option("--palette", f.palette,
                  "Comma-separated color stops from low to high shade (default #ffffff,#ffd700,#d71e1e)");
  app->add_option("--color", f.color, "ANSI colors: auto (from COLORTERM), truecolor or 8")
      ->check(CLI::IsMember({"auto", "truecolor", "8"}))
      ->capture_default_str();
  app->add_flag("--no-outline", f.no_outline, "Do not outline or underline hotspot tokens");
  app->add_flag("--scores", f.scores, "Include the hotspot score table");
  app->add_flag("--trust", f.trust, "LaTeX: emit hotspot token text raw instead of escaped");
}

void add_request_flags(CLI::App* app, RequestFlags& f) {
  app->add_option("--model", f.model, "Model identifier sent to the endpoint")->capture_default_str();
  app->add_option("--endpoint", f.endpoint, "Chat-completion endpoint URL")->capture_default_str();
  app->add_option("--auth-env", f.auth_env, "Environment variable holding the bearer token")
      ->capture_default_str();
  app->add_option("--max-tokens", f.max_tokens, "Completion token limit")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--prompts", f.prompts, "JSON file overriding the built-in prompts");
  app->add_option("--archive", f.archive,
                  "Replay archive directory (default: 'replay' next to the input)");
  app->add_flag("--live", f.live,
                "Send requests to the endpoint and archive the responses (default: replay only)");
}

std::string read_all(const std::string& path, Services& services) {
  if (path == "-") {
    return std::string(std::istreambuf_iterator<char>(*services.in), {});
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), {});
  if (in.bad()) throw IoError("error reading " + path);
  return text;
}

void write_all(const std::string& path, const std::string& content, Services& services) {
  if (path == "-") {
    *services.out << content;
    services.out->flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  out.close();
  if (!out) throw IoError("error writing " + path);
}

std::string transcript_to_string(const Transcript& t) {
  std::ostringstream os;
  write_transcript(t, os);
  return os.str();
}

Transcript transcript_from_string(const std::string& text) {
  std::istringstream in(text);
  return read_transcript(in);
}

/// Returns the parsed object when the whole text is one JSON object, else
/// nothing (a JSONL transcript has several lines).
std::optional<json> single_json_object(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  return j;
}

json parse_json_document(const std::string& text, const std::string& label) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError(0, label + " is not valid JSON");
  return j;
}

Analysis analyze_input(const std::string& text, const AnalysisOptions& options) {
  if (auto doc = single_json_object(text); doc && doc->contains("entropy")) {
    Analysis a = analyze(entropy_series_from_json(doc->at("entropy")), options);
    if (doc->contains("doc") && doc->at("doc").is_string()) a.document_id = doc->at("doc");
    if (doc->contains("truth")) a.truth = annotation_set_from_json(doc->at("truth"));
    return a;
  }
  return analyze(transcript_from_string(text), options);
}

std::string analysis_text(const Analysis& a) { return to_json(a).dump() + "\n"; }

/// Accepts an analysis document or a bare hotspot report.
HotspotReport report_from_document(const json& j) {
  if (j.is_object() && j.contains("report")) return hotspot_report_from_json(j.at("report"));
  return hotspot_report_from_json(j);
}

/// source_meta["image"] as given, else relative to the transcript's folder.
std::optional<fs::path> resolve_image(const Transcript& t, const std::string& transcript_path) {
  auto it = t.source_meta.find("image");
  if (it == t.source_meta.end() || it->second.empty()) return std::nullopt;
  const fs::path given(it->second);
  std::error_code ec;
  if (fs::is_regular_file(given, ec)) return given;
  if (transcript_path != "-" && given.is_relative()) {
    const fs::path beside = fs::path(transcript_path).parent_path() / given;
    if (fs::is_regular_file(beside, ec)) return beside;
  }
  return std::nullopt;
}

RenderSpec render_spec(const RenderFlags& f, RenderMode mode, Services& services) {
  RenderSpec spec;
  spec.mode = mode;
  if (!f.palette.empty()) {
    spec.palette.clear();
    std::stringstream ss(f.palette);
    for (std::string stop; std::getline(ss, stop, ',');) spec.palette.push_back(parse_hex_color(stop));
  }
  spec.hotspot_outline = !f.no_outline;
  spec.include_scores = f.scores;
  spec.latex_trust = f.trust;
  if (f.color == "auto") {
    const auto colorterm = services.env ? services.env("COLORTERM") : std::nullopt;
    spec.ansi_truecolor = colorterm && (*colorterm == "truecolor" || *colorterm == "24bit");
  } else {
    spec.ansi_truecolor = f.color == "truecolor";
  }
  return spec;
}

std::string render_document(const Transcript& t, const HotspotReport& report, const RenderFlags& f,
                            RenderMode mode, const std::string& transcript_path,
                            Services& services) {
  RenderSpec spec = render_spec(f, mode, services);
  if (mode == RenderMode::kHtml) {
    if (auto path = resolve_image(t, transcript_path)) {
      const ImageInput img = load_image(*path);
      spec.image = EmbeddedImage{img.bytes, img.mime_type, t.source_meta.at("image")};
    } else if (t.source_meta.count("image")) {
      *services.err << "warning: source image " << t.source_meta.at("image")
                    << " not found; rendering without it\n";
    }
  }
  return render(t, report, spec);
}

std::string heatmap_path(const std::string& transcript_path, RenderMode mode) {
  return fs::path(transcript_path).replace_extension(std::string(file_suffix(mode))).string();
}

RequestConfig request_config(const RequestFlags& f) {
  RequestConfig cfg = RequestConfig::with_default_prompts();
  cfg.model_id = f.model;
  cfg.endpoint_url = f.endpoint;
  cfg.auth_token_env = f.auth_env;
  cfg.max_tokens = f.max_tokens;
  if (!f.prompts.empty()) {
    const PromptSet prompts = load_prompts(f.prompts);
    cfg.prompt_system = prompts.transcribe_system;
    cfg.prompt_user = prompts.transcribe_user;
  }
  return cfg;
}

ChatClient make_client(const RequestFlags& f, const fs::path& default_archive, Services& services) {
  const fs::path dir = f.archive.empty() ? default_archive : fs::path(f.archive);
  const ClientMode mode = f.live ? ClientMode::kLive : ClientMode::kReplay;
  std::shared_ptr<Transport> transport;
  if (mode == ClientMode::kLive) {
    if (!services.make_transport) throw StartupError("no network transport available");
    transport = services.make_transport();
  }
  return ChatClient(ArchiveStore(dir), mode, transport, services.retry, services.env);
}

// ---------------------------------------------------------------- commands

struct ScanCommand {
  std::string image;
  int k = 5;
  int k_max = kMaxTopLogprobs;
  bool adaptive = false;
  double tail_threshold = kDefaultTailThreshold;
  std::string output;
  std::string tex_output;
  std::string render_mode;
  std::string dpi;
  RequestFlags request;
  AnalysisFlags analysis;
  RenderFlags render;

  int run(Services& services) const {
    const fs::path image_path(image);
    ImageInput img = load_image(image_path);  // aborts before any request
    img.reference = image_path.filename().string();

    RequestConfig cfg = request_config(request);
    cfg.k = k;
    cfg.k_max = k_max;
    validate(cfg);
    ChatClient client = make_client(request, image_path.parent_path() / "replay", services);
    Transcript t = adaptive ? transcribe_adaptive(img, cfg, client, tail_threshold)
                            : transcribe(img, cfg, client);
    if (!dpi.empty()) t.source_meta["dpi"] = dpi;
    if (auto it = t.source_meta.find("adaptive_warning"); it != t.source_meta.end()) {
      *services.err << "warning: " << it->second << "\n";
    }

    const std::string jsonl_path =
        output.empty() ? fs::path(image_path).replace_extension(".jsonl").string() : output;
    const std::string tex_path =
        tex_output.empty() ? fs::path(image_path).replace_extension(".tex").string() : tex_output;
    write_all(jsonl_path, transcript_to_string(t), services);
    write_all(tex_path, t.text, services);

    if (!render_mode.empty()) {
      const RenderMode mode = parse_render_mode(render_mode);
      const Analysis a = analyze(t, analysis.options());
      // Same bytes as analyze + render run separately.
      const HotspotReport report =
          hotspot_report_from_json(json::parse(to_json(a).dump()).at("report"));
      const std::string rendered = render_document(t, report, render, mode, jsonl_path, services);
      const bool to_stdout = mode == RenderMode::kAnsi || jsonl_path == "-";
      write_all(to_stdout ? "-" : heatmap_path(jsonl_path, mode), rendered, services);
    }
    return 0;
  }
};

struct AnalyzeCommand {
  std::vector<std::string> inputs{"-"};
  std::string output;
  AnalysisFlags analysis;

  int run(Services& services) const {
    const AnalysisOptions options = analysis.options();
    if (inputs.size() == 1) {
      const Analysis a = analyze_input(read_all(inputs.front(), services), options);
      write_all(output.empty() ? "-" : output, analysis_text(a), services);
      return 0;
    }
    if (!output.empty()) throw UsageError("-o cannot be combined with several inputs");
    for (const auto& in : inputs) {
      if (in == "-") throw UsageError("stdin cannot be one of several inputs");
    }
    std::vector<std::string> texts(inputs.size());
    std::vector<std::string> failures(inputs.size());
    std::vector<int> codes(inputs.size(), 0);
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(inputs.size()); ++i) {
      try {
        std::ifstream in(inputs[i], std::ios::binary);
        if (!in) throw IoError("cannot open " + inputs[i]);
        const std::string text((std::istreambuf_iterator<char>(in)), {});
        texts[i] = analysis_text(analyze_input(text, options));
      } catch (const Error& e) {
        failures[i] = e.what();
        codes[i] = static_cast<int>(e.exit_code());
      }
    }
    int status = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (codes[i] != 0) {
        *services.err << "error: " << inputs[i] << ": " << failures[i] << "\n";
        if (status == 0) status = codes[i];
        continue;
      }
      const std::string out = fs::path(inputs[i]).replace_extension(".analysis.json").string();
      write_all(out, texts[i], services);
    }
    return status;
  }
};

struct RenderCommand {
  std::string transcript = "-";
  std::string report_path;
  std::string output;
  AnalysisFlags analysis;
  RenderFlags render;

  int run(Services& services) const {
    const RenderMode mode = parse_render_mode(render.mode);
    const Transcript t = transcript_from_string(read_all(transcript, services));
    HotspotReport report;
    if (!report_path.empty()) {
      if (report_path == "-" && transcript == "-") {
        throw UsageError("transcript and report cannot both come from stdin");
      }
      report = report_from_document(parse_json_document(read_all(report_path, services), report_path));
    } else {
      report = analyze(t, analysis.options()).report;
    }
    const std::string rendered = render_document(t, report, render, mode, transcript, services);
    std::string target = output;
    if (target.empty()) {
      target = mode == RenderMode::kAnsi || transcript == "-" ? "-" : heatmap_path(transcript, mode);
    }
    write_all(target, rendered, services);
    return 0;
  }
};

struct EvaluateCommand {
  std::string analysis_path = "-";
  std::vector<std::string> truths;
  std::string output = "-";

  int run(Services& services) const {
    const json doc = parse_json_document(read_all(analysis_path, services), analysis_path);
    const HotspotReport report = report_from_document(doc);
    std::vector<AnnotationSet> sets;
    for (const auto& source : truths) {
      if (source == "-") {
        if (!doc.is_object() || !doc.contains("truth")) {
          throw StructuralError(analysis_path + " carries no embedded ground truth");
        }
        sets.push_back(annotation_set_from_json(doc.at("truth")));
        continue;
      }
      const json j = parse_json_document(read_all(source, services), source);
      sets.push_back(annotation_set_from_json(j.is_object() && j.contains("truth") ? j.at("truth") : j));
    }
    const AnnotationSet truth = sets.size() == 1 ? sets.front() : union_annotations(sets);
    if (doc.is_object() && doc.contains("doc") && doc.at("doc").is_string() &&
        doc.at("doc") != truth.document_id) {
      *services.err << "warning: annotations are for \"" << truth.document_id
                    << "\" but the analysis is for \"" << doc.at("doc").get<std::string>() << "\"\n";
    }
    ordered_json out;
    out["doc"] = truth.document_id;
    out["annotator"] = truth.annotator_id;
    const ordered_json result = to_json(overlap(report, truth));
    for (const auto& [key, value] : result.items()) out[key] = value;
    write_all(output, out.dump() + "\n", services);
    return 0;
  }
};

struct RepromptCommand {
  std::string transcript;
  std::string report_path;
  std::size_t context = 20;
  bool text_only = false;
  bool auto_accept = false;
  std::string output = "-";
  std::string patched_path;
  RequestFlags request;
  AnalysisFlags analysis;

  int run(Services& services) const {
    const Transcript t = transcript_from_string(read_all(transcript, services));
    const HotspotReport report =
        report_path.empty()
            ? analyze(t, analysis.options()).report
            : report_from_document(parse_json_document(read_all(report_path, services), report_path));

    RequestConfig cfg = request_config(request);
    RepromptOptions options;
    options.context_radius = context;
    options.include_image = !text_only;
    options.auto_accept = auto_accept;
    if (!request.prompts.empty()) {
      const PromptSet prompts = load_prompts(request.prompts);
      options.system_prompt = prompts.reprompt_system;
      options.user_prompt = prompts.reprompt_user;
    }
    std::optional<ImageInput> image;
    if (!text_only) {
      if (auto path = resolve_image(t, transcript)) {
        image = load_image(*path);
      } else {
        *services.err << "warning: source image not found; sending text only\n";
      }
    }
    const fs::path base = transcript == "-" ? fs::path(".") : fs::path(transcript).parent_path();
    ChatClient client = make_client(request, base / "replay", services);
    const RepromptOutcome outcome =
        reprompt_hotspots(t, report, cfg, client, options, image ? &*image : nullptr);

    std::string lines;
    for (const auto& r : outcome.results) lines += to_json(r).dump() + "\n";
    write_all(output, lines, services);
    if (outcome.patched) {
      std::string target = patched_path;
      if (target.empty()) {
        if (transcript == "-") throw UsageError("--auto-accept on stdin input needs --patched");
        target = fs::path(transcript).replace_extension(".patched.jsonl").string();
      }
      write_all(target, transcript_to_string(*outcome.patched), services);
    }
    return 0;
  }
};

struct SynthCommand {
  std::string spec_path;
  std::uint64_t seed = 7;
  std::size_t n = 500;
  double baseline = 0.3;
  double sd = 0.1;
  std::size_t spans = 3;
  std::size_t span_length = 8;
  double spike = 2.0;
  std::string output = "-";

  int run(Services& services) const {
    SyntheticSpec spec =
        spec_path.empty()
            ? random_span_spec(n, baseline, sd, spans, span_length, spike, seed)
            : synthetic_spec_from_json(parse_json_document(read_all(spec_path, services), spec_path));
    const SyntheticDocument doc = generate_synthetic(spec);
    ordered_json out;
    out["doc"] = spec.document_id;
    out["spec"] = to_json(spec);
    out["entropy"] = to_json(doc.series);
    out["truth"] = to_json(doc.truth);
    write_all(output, out.dump() + "\n", services);
    return 0;
  }
};

}  // namespace

Services Services::standard() {
  Services s;
  s.in = &std::cin;
  s.out = &std::cout;
  s.err = &std::cerr;
  s.make_transport = [] { return std::make_shared<HttpTransport>(); };
  return s;
}

int run(const std::vector<std::string>& args, Services& services) {
  CLI::App app("Token-entropy hotspots for LLM OCR transcripts", "entroheat");
  app.require_subcommand(1);
  app.set_version_flag("--version", "entroheat 0.1.0");

  ScanCommand scan;
  CLI::App* scan_cmd = app.add_subcommand("scan", "Transcribe a page image with token logprobs");
  scan_cmd->add_option("image", scan.image, "Page image (png, jpg, webp, gif)")->required();
  scan_cmd->add_option("--k", scan.k, "Alternatives requested per token")
      ->check(CLI::Range(1, kMaxTopLogprobs))
      ->capture_default_str();
  scan_cmd->add_flag("--adaptive", scan.adaptive,
                     "Re-request with a larger k while some token's tail mass is above the threshold");
  scan_cmd->add_option("--tail-threshold", scan.tail_threshold, "Tail mass that triggers a larger k")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  scan_cmd->add_option("--k-max", scan.k_max, "Largest k the adaptive policy may request")
      ->check(CLI::Range(1, kMaxTopLogprobs))
      ->capture_default_str();
  scan_cmd->add_option("-o,--output", scan.output, "Transcript JSONL (default: <image stem>.jsonl)");
  scan_cmd->add_option("--dpi", scan.dpi, "Resolution label recorded in the transcript header");
  scan_cmd->add_option("--tex", scan.tex_output, "LaTeX text (default: <image stem>.tex)");
  scan_cmd->add_option("--render", scan.render_mode, "Also analyze and render: html, latex or ansi")
      ->check(CLI::IsMember({"html", "latex", "ansi"}));
  add_request_flags(scan_cmd, scan.request);
  add_analysis_flags(scan_cmd, scan.analysis);
  add_render_flags(scan_cmd, scan.render, false);

  AnalyzeCommand an;
  CLI::App* analyze_cmd = app.add_subcommand(
      "analyze", "Entropy series, window means and hotspots for transcripts or entropy documents");
  analyze_cmd->add_option("inputs", an.inputs,
                          "Transcript JSONL or synth document; '-' is stdin. Several inputs are "
                          "written next to each input as <stem>.analysis.json")
      ->capture_default_str();
  analyze_cmd->add_option("-o,--output", an.output, "Output for a single input (default stdout)");
  add_analysis_flags(analyze_cmd, an.analysis);

  RenderCommand rc;
  CLI::App* render_cmd = app.add_subcommand("render", "Heatmap of a transcript");
  render_cmd->add_option("transcript", rc.transcript, "Transcript JSONL or '-'")->capture_default_str();
  render_cmd->add_option("--report", rc.report_path,
                         "Analysis or hotspot report JSON (default: analyze with the flags below)");
  render_cmd->add_option("-o,--output", rc.output,
                         "Output file (default: <input>.heatmap.html/.tex, stdout for ansi)");
  add_render_flags(render_cmd, rc.render, true);
  add_analysis_flags(render_cmd, rc.analysis);

  EvaluateCommand ev;
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "Overlap of hotspots with annotated tokens");
  eval_cmd->add_option("analysis", ev.analysis_path, "Analysis or report JSON, '-' for stdin")
      ->capture_default_str();
  eval_cmd->add_option("--truth", ev.truths,
                       "Annotation JSON; repeat to take the union. '-' uses the truth embedded "
                       "in the analysis")
      ->required();
  eval_cmd->add_option("-o,--output", ev.output, "Output file")->capture_default_str();

  RepromptCommand rp;
  CLI::App* reprompt_cmd =
      app.add_subcommand("reprompt", "Ask the model to re-check each hotspot in context");
  reprompt_cmd->add_option("transcript", rp.transcript, "Transcript JSONL or '-'")->required();
  reprompt_cmd->add_option("--report", rp.report_path,
                           "Analysis or hotspot report JSON (default: analyze with the flags below)");
  reprompt_cmd->add_option("--context", rp.context, "Tokens of context on each side of a hotspot")
      ->capture_default_str();
  reprompt_cmd->add_flag("--text-only", rp.text_only, "Do not attach the source image");
  reprompt_cmd->add_flag("--auto-accept", rp.auto_accept,
                         "Accept well-formed corrections and write a patched transcript");
  reprompt_cmd->add_option("-o,--output", rp.output, "Results JSONL")->capture_default_str();
  reprompt_cmd->add_option("--patched", rp.patched_path,
                           "Patched transcript (default: <input stem>.patched.jsonl)");
  add_request_flags(reprompt_cmd, rp.request);
  add_analysis_flags(reprompt_cmd, rp.analysis);

  SynthCommand sy;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Synthetic entropy series with planted spans");
  synth_cmd->add_option("--spec", sy.spec_path, "Synthetic spec JSON (overrides the flags below)");
  synth_cmd->add_option("--seed", sy.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--n", sy.n, "Series length")->check(CLI::PositiveNumber)->capture_default_str();
  synth_cmd->add_option("--baseline", sy.baseline, "Baseline mean entropy in bits")->capture_default_str();
  synth_cmd->add_option("--sd", sy.sd, "Baseline noise standard deviation")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synth_cmd->add_option("--spans", sy.spans, "Number of planted spans")->capture_default_str();
  synth_cmd->add_option("--span-length", sy.span_length, "Tokens per planted span")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("--spike", sy.spike, "Bits added on planted tokens")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("-o,--output", sy.output, "Output file")->capture_default_str();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e, *services.out, *services.err);
    return status == 0 ? 0 : code(ExitCode::kUsage);
  }

  try {
    if (*scan_cmd) return scan.run(services);
    if (*analyze_cmd) return an.run(services);
    if (*render_cmd) return rc.run(services);
    if (*eval_cmd) return ev.run(services);
    if (*reprompt_cmd) return rp.run(services);
    if (*synth_cmd) return sy.run(services);
  } catch (const Error& e) {
    *services.err << "error: " << e.what() << "\n";
    return code(e.exit_code());
  } catch (const json::exception& e) {
    *services.err << "error: " << e.what() << "\n";
    return code(ExitCode::kValidation);
  } catch (const std::exception& e) {
    *services.err << "error: " << e.what() << "\n";
    return 1;
  }
  return code(ExitCode::kUsage);
}

}  // namespace entroheat::cli
