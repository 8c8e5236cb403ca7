#include "audioscript/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <sstream>

#include "audioscript/chat.hpp"
#include "audioscript/compiler.hpp"
#include "audioscript/executor.hpp"
#include "audioscript/scriptwriter.hpp"
#include "audioscript/voicecast.hpp"
#include "audioscript/wav.hpp"

namespace audioscript {

using nlohmann::json;
namespace fs = std::filesystem;

ProjectConfig load_project_config(const std::optional<fs::path>& path) {
  ProjectConfig config;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw std::runtime_error("cannot open config " + path->string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const json j = json::parse(buffer.str());
    if (j.contains("voice_catalog")) {
      fs::path catalog = j["voice_catalog"].get<std::string>();
      if (catalog.is_relative()) catalog = path->parent_path() / catalog;
      config.voice_catalog = catalog;
    }
    if (j.contains("backend")) {
      config.backend = backend_config_from_json(j["backend"].dump());
    }
    if (j.contains("output_dir")) {
      config.output_dir = j["output_dir"].get<std::string>();
    }
    if (j.contains("master_lufs") && !j["master_lufs"].is_null()) {
      config.master_lufs = j["master_lufs"].get<double>();
    }
    config.jobs = j.value("jobs", config.jobs);
  }
  if (const char* backend = std::getenv("AUDIOSCRIPT_BACKEND")) {
    const std::string kind = backend;
    if (kind == "http") {
      config.backend.kind = BackendKind::kHttp;
    } else if (kind == "synthetic") {
      config.backend.kind = BackendKind::kSynthetic;
    }
  }
  if (const char* jobs = std::getenv("AUDIOSCRIPT_JOBS")) {
    config.jobs = std::atoi(jobs);
  }
  if (const char* dir = std::getenv("AUDIOSCRIPT_OUTPUT_DIR")) {
    config.output_dir = dir;
  }
  if (config.jobs < 1) throw std::runtime_error("jobs must be >= 1");
  return config;
}

namespace {

// Failure carrying the exit code it should produce.
struct CommandError : std::runtime_error {
  CommandError(int code, const std::string& message)
      : std::runtime_error(message), exit_code(code) {}
  int exit_code;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CommandError(kExitIo, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CommandError(kExitIo, "cannot write " + path.string());
  out << content;
}

struct ScriptOptions {
  bool lenient = false;
  bool auto_close = false;
  bool json = false;
};

struct LlmOptions {
  std::string replay;
  double temperature = 0.0;
};

std::unique_ptr<LlmClient> make_llm(const LlmOptions& options) {
  if (!options.replay.empty()) {
    return ReplayLlmClient::from_file(options.replay);
  }
  HttpLlmConfig config = http_llm_config_from_env();
  if (config.api_key.empty()) {
    throw CommandError(kExitIo,
                       "no LLM configured: pass --replay or set "
                       "AUDIOSCRIPT_LLM_API_KEY");
  }
  return std::make_unique<HttpLlmClient>(config);
}

// Parses, optionally auto-closes, and validates. Prints the report; returns
// the script only when it has no errors.
std::optional<AudioScript> load_script(const fs::path& path,
                                       const ScriptOptions& options,
                                       std::ostream& out, std::ostream& err) {
  const std::string raw = read_file(path);
  ValidationReport report;
  AudioScript script;
  try {
    ParseResult parsed = parse_script_detailed(raw, {options.lenient});
    script = std::move(parsed.script);
    if (options.auto_close) script = auto_close_backgrounds(script);
    report = validate(script);
    report.warnings.insert(report.warnings.begin(), parsed.warnings.begin(),
                           parsed.warnings.end());
  } catch (const ParseError& e) {
    report.errors.push_back(e.diagnostic());
  }
  if (options.json) {
    out << report.to_json() << "\n";
  } else if (!report.ok() || !report.warnings.empty()) {
    (report.ok() ? out : err) << report.to_text();
  }
  if (!report.ok()) return std::nullopt;
  return script;
}

struct CastOptions {
  std::string voices;
  std::string allocator = "deterministic";
  bool allow_reuse = false;
};

VoiceMap cast_voices(const AudioScript& script, const CastOptions& cast,
                     const ProjectConfig& config, const LlmOptions& llm,
                     std::ostream& err) {
  VoiceCatalog catalog = default_voice_catalog();
  if (!cast.voices.empty()) {
    catalog = load_voice_catalog(cast.voices);
  } else if (config.voice_catalog) {
    catalog = load_voice_catalog(*config.voice_catalog);
  }
  AllocationOptions options;
  options.allow_reuse = cast.allow_reuse;
  std::unique_ptr<LlmClient> client;
  if (cast.allocator == "llm") {
    client = make_llm(llm);
    options.allocator = Allocator::kLlm;
    options.llm = client.get();
    options.temperature = llm.temperature;
  }
  AllocationResult result = allocate_voices_detailed(script, catalog, options);
  for (const auto& w : result.warnings) err << "voicecast: " << w << "\n";
  return result.voices;
}

void write_plan_files(const ExecutionPlan& plan, const fs::path& stem) {
  write_file(stem.string() + ".plan.txt", plan_to_text(plan));
  write_file(stem.string() + ".plan.json", plan_to_json(plan) + "\n");
}

struct RenderOptions {
  fs::path out_path;
  bool emit_plan = false;
  bool json = false;
};

int render_script(const AudioScript& script, const ProjectConfig& config,
                  const CastOptions& cast, const LlmOptions& llm,
                  const RenderOptions& render, std::ostream& out,
                  std::ostream& err) {
  const VoiceMap voices = cast_voices(script, cast, config, llm, err);
  const ExecutionPlan plan = compile(script, voices);
  fs::path stem = render.out_path;
  stem.replace_extension();
  if (render.emit_plan) write_plan_files(plan, stem);

  std::unique_ptr<GeneratorBackend> backend = make_backend(config.backend);
  const BackendHealth health = backend->health();
  if (!health.ok) {
    throw BackendError("Unhealthy", "backend unhealthy: " + health.detail);
  }
  ExecuteOptions exec;
  exec.jobs = config.jobs;
  exec.master_lufs = config.master_lufs;
  RenderResult result = execute(plan, *backend, exec);
  if (render.out_path.has_parent_path()) {
    fs::create_directories(render.out_path.parent_path());
  }
  write_wav(result.audio, render.out_path);
  write_file(stem.string() + ".report.json", result.report.to_json() + "\n");

  if (render.json) {
    out << result.report.to_json() << "\n";
    return kExitOk;
  }
  out << "wrote " << render.out_path.string() << " (" << std::fixed
      << std::setprecision(4) << result.report.total_seconds() << " s, "
      << result.report.total_samples << " samples)\n";
  for (const auto& step : result.report.steps) {
    out << "  step " << step.index << " " << std::left << std::setw(10)
        << step.op << " b" << step.buf << "  " << std::setprecision(3)
        << step.seconds << " s";
    if (step.target_lufs) out << "  target " << *step.target_lufs << " LUFS";
    for (const auto& w : step.warnings) out << "  [" << w << "]";
    out << "\n";
  }
  out << "  total wall time " << result.report.wall_seconds << " s\n";
  return kExitOk;
}

void add_backend_flags(CLI::App* cmd, ProjectConfig& config,
                       std::string& backend_kind, std::uint64_t& seed,
                       int& jobs, double& master_lufs) {
  cmd->add_option("--backend", backend_kind, "Generation backend")
      ->check(CLI::IsMember({"synthetic", "http"}));
  cmd->add_option("--seed", seed, "Seed for the synthetic backend");
  cmd->add_option("--jobs", jobs, "Concurrent backend requests")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--master-lufs", master_lufs,
                  "Normalize the final mix to this loudness");
  cmd->add_option("--tts-url", config.backend.tts_url, "HTTP TTS endpoint");
  cmd->add_option("--music-url", config.backend.music_url,
                  "HTTP music endpoint");
  cmd->add_option("--sfx-url", config.backend.sfx_url,
                  "HTTP sound effect endpoint");
  cmd->add_option("--timeout", config.backend.timeout_seconds,
                  "HTTP request timeout in seconds");
  cmd->add_option("--retries", config.backend.retries, "HTTP retries");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in,
            std::ostream& out, std::ostream& err) {
  CLI::App app{"Compile and render JSON audio scripts"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "Project config file (JSON)");

  ScriptOptions script_opts;
  CastOptions cast;
  LlmOptions llm;
  std::string script_path;
  std::string out_path;
  std::string out_dir;
  bool emit_plan = false;
  std::string backend_kind;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;
  double master_lufs = 1.0;  // > 0 means unset
  ProjectConfig flags;

  auto add_script_flags = [&](CLI::App* cmd) {
    cmd->add_option("script", script_path, "Audio script (JSON)")->required();
    cmd->add_flag("--lenient", script_opts.lenient,
                  "Warn on unknown keys instead of failing");
    cmd->add_flag("--auto-close", script_opts.auto_close,
                  "Close unterminated backgrounds after the last foreground");
    cmd->add_flag("--json", script_opts.json, "Machine-readable output");
  };
  auto add_cast_flags = [&](CLI::App* cmd) {
    cmd->add_option("--voices", cast.voices, "Voice catalog (JSON)");
    cmd->add_option("--allocator", cast.allocator, "Voice allocation")
        ->check(CLI::IsMember({"deterministic", "llm"}));
    cmd->add_flag("--allow-voice-reuse", cast.allow_reuse,
                  "Allow more characters than presets");
  };
  auto add_llm_flags = [&](CLI::App* cmd) {
    cmd->add_option("--replay", llm.replay,
                    "Replay LLM responses from a JSON file");
    cmd->add_option("--temperature", llm.temperature, "LLM temperature");
  };

  auto* validate_cmd = app.add_subcommand("validate", "Validate a script");
  add_script_flags(validate_cmd);

  auto* compile_cmd =
      app.add_subcommand("compile", "Compile a script into a plan");
  add_script_flags(compile_cmd);
  add_cast_flags(compile_cmd);
  add_llm_flags(compile_cmd);
  compile_cmd->add_option("--out-dir", out_dir, "Where to write plan files");
  compile_cmd->add_flag("--emit-plan", emit_plan,
                        "Also print the plan listing");

  auto* render_cmd = app.add_subcommand("render", "Render a script to WAV");
  add_script_flags(render_cmd);
  add_cast_flags(render_cmd);
  add_llm_flags(render_cmd);
  render_cmd->add_option("-o,--out", out_path, "Output WAV path")->required();
  render_cmd->add_flag("--emit-plan", emit_plan,
                       "Write plan listing and JSON beside the WAV");
  add_backend_flags(render_cmd, flags, backend_kind, seed, jobs, master_lufs);

  std::string instruction;
  double duration = 0.0;
  int max_retries = 2;
  auto* write_cmd =
      app.add_subcommand("write", "Ask the LLM to write a script");
  write_cmd->add_option("instruction", instruction, "What to create")
      ->required();
  write_cmd->add_option("-o,--out", out_path, "Output script path")->required();
  write_cmd->add_option("--duration", duration,
                        "Requested total duration in seconds");
  write_cmd->add_option("--max-retries", max_retries,
                        "Corrective re-prompts after a failed attempt");
  add_llm_flags(write_cmd);

  std::string transcript_path;
  auto* chat_cmd =
      app.add_subcommand("chat", "Edit a script over several dialogue turns");
  chat_cmd->add_option("script", script_path, "Starting script (optional)");
  chat_cmd->add_option("--transcript", transcript_path,
                       "Transcript output path");
  add_llm_flags(chat_cmd);
  add_cast_flags(chat_cmd);
  add_backend_flags(chat_cmd, flags, backend_kind, seed, jobs, master_lufs);

  std::string instructions_path;
  auto* csr_cmd = app.add_subcommand(
      "csr", "Single-shot compilation success rate over instructions");
  csr_cmd
      ->add_option("instructions", instructions_path,
                   "JSON list of instructions")
      ->required();
  csr_cmd->add_option("--jobs", jobs, "Concurrent requests");
  csr_cmd->add_flag("--json", script_opts.json, "Machine-readable output");
  add_llm_flags(csr_cmd);

  std::vector<const char*> argv{"audioscript"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitIo;
  }
  for (auto* cmd : {render_cmd, chat_cmd}) {
    if (cmd->count("--seed") > 0) seed_set = true;
  }

  try {
    ProjectConfig config = load_project_config(
        config_path.empty() ? std::nullopt
                            : std::optional<fs::path>(config_path));
    // Command-line flags win over the config file.
    if (!flags.backend.tts_url.empty())
      config.backend.tts_url = flags.backend.tts_url;
    if (!flags.backend.music_url.empty())
      config.backend.music_url = flags.backend.music_url;
    if (!flags.backend.sfx_url.empty())
      config.backend.sfx_url = flags.backend.sfx_url;
    for (auto* cmd : {render_cmd, chat_cmd}) {
      if (cmd->count("--timeout") > 0)
        config.backend.timeout_seconds = flags.backend.timeout_seconds;
      if (cmd->count("--retries") > 0)
        config.backend.retries = flags.backend.retries;
    }
    if (backend_kind == "http") config.backend.kind = BackendKind::kHttp;
    if (backend_kind == "synthetic")
      config.backend.kind = BackendKind::kSynthetic;
    if (seed_set) config.backend.seed = seed;
    if (jobs > 0) config.jobs = jobs;
    if (master_lufs <= 0.0) config.master_lufs = master_lufs;

    if (validate_cmd->parsed()) {
      const auto script = load_script(script_path, script_opts, out, err);
      if (script && !script_opts.json) out << "ok: script is compilable\n";
      return script ? kExitOk : kExitInvalid;
    }

    if (compile_cmd->parsed()) {
      const auto script = load_script(script_path, script_opts, out, err);
      if (!script) return kExitInvalid;
      const ExecutionPlan plan =
          compile(*script, cast_voices(*script, cast, config, llm, err));
      fs::path dir = out_dir.empty() ? config.output_dir : fs::path(out_dir);
      const fs::path stem = dir / fs::path(script_path).stem();
      write_plan_files(plan, stem);
      if (script_opts.json) {
        out << plan_to_json(plan) << "\n";
      } else {
        if (emit_plan) out << plan_to_text(plan);
        out << "wrote " << stem.string() << ".plan.txt and .plan.json ("
            << plan.steps.size() << " steps)\n";
      }
      return kExitOk;
    }

    if (render_cmd->parsed()) {
      ScriptOptions quiet = script_opts;
      quiet.json = false;
      const auto script = load_script(script_path, quiet, err, err);
      if (!script) return kExitInvalid;
      check_backend_config(config.backend);
      return render_script(*script, config, cast, llm,
                           {out_path, emit_plan, script_opts.json}, out, err);
    }

    if (write_cmd->parsed()) {
      auto client = make_llm(llm);
      WriteRequest request;
      request.instruction = instruction;
      if (duration > 0.0) request.duration_hint = duration;
      request.max_retries = max_retries;
      request.temperature = llm.temperature;
      out << "prompt: " << build_script_prompt(request).user_message << "\n";
      try {
        const WriteResult result = write_script(request, *client);
        write_file(out_path, serialize_script(result.script) + "\n");
        out << "wrote " << out_path << " after " << result.attempts
            << " attempt(s)\n";
        return kExitOk;
      } catch (const ScriptWritingFailed& e) {
        err << "script writing failed after " << e.attempts()
            << " attempt(s):\n"
            << e.last_report().to_text();
        return kExitWriteFailed;
      }
    }

    if (csr_cmd->parsed()) {
      auto client = make_llm(llm);
      const json list = json::parse(read_file(instructions_path));
      const auto instructions = list.get<std::vector<std::string>>();
      const CsrResult csr = batch_csr(instructions, *client, config.jobs);
      if (script_opts.json) {
        out << json{{"success_count", csr.success_count},
                    {"total", csr.total},
                    {"rate", csr.rate}}
                   .dump(2)
            << "\n";
      } else {
        out << "compilation success rate: " << csr.success_count << "/"
            << csr.total << " = " << csr.rate << "\n";
      }
      return kExitOk;
    }

    if (chat_cmd->parsed()) {
      std::optional<AudioScript> initial;
      if (!script_path.empty()) {
        initial = load_script(script_path, {}, err, err);
        if (!initial) return kExitInvalid;
      }
      auto client = make_llm(llm);
      ChatSession session(*client, initial, llm.temperature);
      const fs::path transcript =
          transcript_path.empty() ? config.output_dir / "chat_transcript.json"
                                  : fs::path(transcript_path);
      out << "commands: show, render [path], quit; anything else edits the "
             "script\n";
      std::string line;
      int renders = 0;
      while (out << "> " << std::flush, std::getline(in, line)) {
        if (line.empty()) continue;
        if (line == "quit" || line == "exit") break;
        if (line == "show") {
          out << (session.script() ? serialize_script(*session.script())
                                   : std::string("(no script yet)"))
              << "\n";
          continue;
        }
        if (line == "render" || line.starts_with("render ")) {
          if (!session.script()) {
            out << "nothing to render yet\n";
            continue;
          }
          fs::path target =
              line.size() > 7
                  ? fs::path(line.substr(7))
                  : config.output_dir /
                        ("chat_render_" + std::to_string(++renders) + ".wav");
          try {
            render_script(*session.script(), config, cast, llm,
                          {target, false, false}, out, err);
          } catch (const std::exception& e) {
            out << "render failed: " << e.what() << "\n";
          }
          continue;
        }
        const ChatTurn& turn = session.submit(line);
        if (turn.accepted) {
          out << turn.diff;
        } else {
          out << "revision rejected; script unchanged\n"
              << turn.report.to_text();
        }
      }
      write_file(transcript, session.transcript_json() + "\n");
      out << "\ntranscript written to " << transcript.string() << "\n";
      return kExitOk;
    }
  } catch (const CommandError& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code;
  } catch (const BackendError& e) {
    err << "BackendError(" << e.code() << ")";
    if (e.step() >= 0) err << " at step " << e.step();
    err << ": " << e.what() << "\n";
    return kExitBackend;
  } catch (const CompileError& e) {
    err << e.code() << ": " << e.what() << "\n";
    return kExitInvalid;
  } catch (const VoiceCastError& e) {
    err << e.code() << ": " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitIo;
}

}  // namespace audioscript
