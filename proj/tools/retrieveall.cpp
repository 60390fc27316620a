#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "retrieveall/backend.hpp"
#include "retrieveall/batch.hpp"
#include "retrieveall/config.hpp"
#include "retrieveall/corpus.hpp"
#include "retrieveall/errors.hpp"
#include "retrieveall/eval.hpp"
#include "retrieveall/example_index.hpp"
#include "retrieveall/prompt.hpp"
#include "retrieveall/router.hpp"

namespace {

using nlohmann::json;
using namespace retrieveall;

// Every config key doubles as a flag of the same name; flags win over the file.
class ConfigLayer {
 public:
  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path_, "key=value config file")
        ->envname("RETRIEVEALL_CONFIG");
    for (const char* key :
         {"encoder.dim", "encoder.seed", "encoder.kind", "retrieval.tau_e", "retrieval.tau_c",
          "retrieval.k", "templates", "pool", "default_language", "backend",
          "backend.corruption_rate", "seed", "infer.batch", "types"}) {
      CLI::Option* opt = cmd->add_option("--" + std::string(key), values_[key], "");
      options_.emplace_back(key, opt);
    }
  }

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_path_.empty()) {
      cfg = load_run_config(config_path_);
    }
    for (const auto& [key, opt] : options_) {
      if (opt->count() > 0) {
        apply_config_entry(cfg, key, values_.at(key));
      }
    }
    validate_encoder_spec(cfg.encoder);
    validate_retrieval_config(cfg.retrieval);
    return cfg;
  }

 private:
  std::string config_path_;
  std::map<std::string, std::string> values_;
  std::vector<std::pair<std::string, CLI::Option*>> options_;
};

GenerationBackend make_backend(const RunConfig& cfg) {
  GenerationBackend backend;
  backend.corruption_rate = cfg.corruption_rate;
  backend.seed = cfg.seed;
  const std::string& spec = cfg.backend_spec;
  if (spec == "oracle-echo") {
    backend.kind = BackendKind::OracleEcho;
    return backend;
  }
  if (spec.rfind("table:", 0) == 0) {
    backend.kind = BackendKind::TableLookup;
    backend.table = load_backend_table(spec.substr(6));
    return backend;
  }
  if (spec.rfind("external:cmd:", 0) == 0) {
    backend.kind = BackendKind::External;
    backend.transport = spawn_process({"/bin/sh", "-c", spec.substr(13)});
    return backend;
  }
  if (spec.rfind("external:", 0) == 0) {
    const std::string rest = spec.substr(9);
    const std::size_t colon = rest.rfind(':');
    if (colon == std::string::npos) {
      throw ConfigError("external backend needs host:port, got '" + rest + "'");
    }
    backend.kind = BackendKind::External;
    backend.transport = connect_tcp(rest.substr(0, colon), std::stoi(rest.substr(colon + 1)));
    return backend;
  }
  throw ConfigError("unknown backend '" + spec +
                    "' (expected oracle-echo, table:FILE, external:HOST:PORT or external:cmd:CMD)");
}

PromptTemplates make_templates(const RunConfig& cfg) {
  if (cfg.templates_path.empty()) return PromptTemplates{};
  return load_templates(cfg.templates_path);
}

AdapterPool pool_from(const RunConfig& cfg) {
  if (cfg.pool_dir.empty()) {
    throw ConfigError("no adapter pool configured (set 'pool' or pass --pool)");
  }
  return load_pool_dir(cfg.pool_dir);
}

json decision_json(const RoutingDecision& decision) {
  json votes = json::object();
  for (const auto& [language, count] : decision.votes) votes[language] = count;
  return json{{"language", decision.language},
              {"adapter_id", decision.adapter_id},
              {"votes", votes},
              {"fallback_used", decision.fallback_used}};
}

json annotations_json(const std::vector<Annotation>& annotations) {
  json out = json::array();
  for (const auto& ann : annotations) {
    out.push_back({{"type", ann.type}, {"entities", ann.entities}});
  }
  return out;
}

void cmd_index_build(const ConfigLayer& layer, const std::string& corpus_path,
                     const std::string& out_path) {
  const RunConfig cfg = layer.resolve();
  const auto corpus = load_corpus_jsonl(corpus_path);
  const ExampleIndex index = ExampleIndex::build(corpus, cfg.encoder, nullptr, cfg.type_order);
  save_index(index, out_path);
  std::cout << json{{"contexts", index.context_count()},
                    {"entities", index.entity_count()},
                    {"types", index.entity_types()},
                    {"dim", index.dim()}}
                   .dump()
            << "\n";
}

void cmd_route(const ConfigLayer& layer, const std::string& index_path,
               const std::vector<std::string>& texts, bool use_stdin) {
  const RunConfig cfg = layer.resolve();
  const ExampleIndex index = load_index(index_path);
  const AdapterPool pool = pool_from(cfg);
  auto route_one = [&](const std::string& text) {
    const VectorF query = encode(index.encoder_spec(), text);
    const RoutingDecision decision =
        route(pool, index, query, cfg.retrieval, cfg.default_language);
    std::cout << decision_json(decision).dump() << "\n";
  };
  for (const auto& text : texts) route_one(text);
  if (use_stdin) {
    std::string line;
    while (std::getline(std::cin, line)) {
      if (!line.empty()) route_one(line);
    }
  }
  if (texts.empty() && !use_stdin) {
    throw ConfigError("route needs input text arguments or --stdin");
  }
}

void cmd_infer(const ConfigLayer& layer, const std::string& index_path,
               const std::string& corpus_path) {
  const RunConfig cfg = layer.resolve();
  const ExampleIndex index = load_index(index_path);
  const AdapterPool pool = pool_from(cfg);
  const PromptTemplates templates = make_templates(cfg);
  const GenerationBackend backend = make_backend(cfg);
  const auto corpus = load_corpus_jsonl(corpus_path);
  validate_corpus(corpus);
  const PipelineConfig pipeline{cfg.retrieval, cfg.default_language, cfg.type_order};

  for (std::size_t start = 0; start < corpus.size();
       start += static_cast<std::size_t>(cfg.batch_size)) {
    const std::size_t end =
        std::min(corpus.size(), start + static_cast<std::size_t>(cfg.batch_size));
    std::vector<VectorF> queries;
    std::vector<RoutingDecision> decisions;
    for (std::size_t i = start; i < end; ++i) {
      queries.push_back(encode(index.encoder_spec(), corpus[i].text));
      decisions.push_back(
          route(pool, index, queries.back(), cfg.retrieval, cfg.default_language));
    }
    // Grouped execution: all samples in the batch share one deduplicated plan.
    const BatchPlan plan = plan_batch(decisions, pool);
    (void)plan;
    for (std::size_t i = start; i < end; ++i) {
      const PromptBundle bundle =
          assemble_bundle(corpus[i], index, templates, pipeline, queries[i - start]);
      const std::string output = generate(backend, bundle);
      json parsed;
      try {
        parsed = annotations_json(parse_output(output));
      } catch (const ParseError&) {
        parsed = nullptr;
      }
      std::cout << json{{"id", corpus[i].id},
                        {"language", decisions[i - start].language},
                        {"prompt_bytes", bundle.input_text.size()},
                        {"output", output},
                        {"parsed", parsed}}
                       .dump()
                << "\n";
    }
  }
}

void cmd_eval(const ConfigLayer& layer, const std::string& index_path,
              const std::string& corpus_path, bool csv, const std::string& out_path) {
  const RunConfig cfg = layer.resolve();
  const ExampleIndex index = load_index(index_path);
  const AdapterPool pool = pool_from(cfg);
  const PromptTemplates templates = make_templates(cfg);
  const GenerationBackend backend = make_backend(cfg);
  auto corpus = load_corpus_jsonl(corpus_path);
  validate_corpus(corpus);
  const PipelineConfig pipeline{cfg.retrieval, cfg.default_language, cfg.type_order};
  const EvalReport report =
      evaluate_pipeline(corpus, pool, index, templates, backend, pipeline);
  const std::string rendered = csv ? report_csv(report) : report_json(report) + "\n";
  if (out_path.empty()) {
    std::cout << rendered;
  } else {
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + out_path);
    out << rendered;
  }
}

struct BenchSetup {
  BaseModel base;
  AdapterPool pool;
  std::vector<RoutingDecision> decisions;
  BatchTensor x;
};

BenchSetup make_bench_setup(int d, int r, int b, int l, int p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> unit(-1.0f, 1.0f);
  const float w_scale = 1.0f / std::sqrt(static_cast<float>(d));
  BenchSetup setup;

  MatrixF w0(d, d);
  for (Eigen::Index i = 0; i < w0.size(); ++i) w0.data()[i] = unit(rng) * w_scale;
  setup.base = make_base_model(std::move(w0));

  for (int a = 0; a < p; ++a) {
    MatrixF A(r, d), B(d, r);
    for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = unit(rng) * w_scale;
    for (Eigen::Index i = 0; i < B.size(); ++i) B.data()[i] = unit(rng) * w_scale;
    const std::string lang = "l" + std::to_string(a);
    setup.pool = register_adapter(
        setup.pool, make_adapter(lang + "-adapter", lang, static_cast<float>(r), std::move(A),
                                 std::move(B)));
  }
  for (int i = 0; i < b; ++i) {
    RoutingDecision decision;
    decision.language = "l" + std::to_string(i % p);
    setup.decisions.push_back(std::move(decision));
  }
  setup.x = BatchTensor::zeros(b, l, d);
  for (Eigen::Index i = 0; i < setup.x.data.size(); ++i) setup.x.data.data()[i] = unit(rng);
  return setup;
}

void cmd_bench(const ConfigLayer& layer, int d, int r, int b, int l, int p, int repeats) {
  const RunConfig cfg = layer.resolve();
  if (b < 1 || l < 1 || d < 1 || r < 1 || repeats < 1) {
    throw PlanError("bench parameters must be >= 1");
  }
  if (p < 1 || p > b) {
    throw PlanError("p must satisfy 1 <= p <= b, got p=" + std::to_string(p) +
                    " b=" + std::to_string(b));
  }
  BenchSetup setup = make_bench_setup(d, r, b, l, p, cfg.seed);
  const BatchPlan plan = plan_batch(setup.decisions, setup.pool);

  using clock = std::chrono::steady_clock;
  auto run_batched = [&]() { return forward(setup.base, plan, setup.x); };
  auto run_sequential = [&]() {
    return sequential_oracle(setup.base, setup.decisions, setup.pool, setup.x);
  };
  (void)run_batched();  // warm caches before timing
  (void)run_sequential();

  std::vector<double> batched_ns, sequential_ns;
  volatile float sink = 0.0f;
  for (int rep = 0; rep < repeats; ++rep) {
    auto t0 = clock::now();
    BatchTensor yb = run_batched();
    auto t1 = clock::now();
    BatchTensor ys = run_sequential();
    auto t2 = clock::now();
    sink = sink + yb.data(0, 0) + ys.data(0, 0);
    batched_ns.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
    sequential_ns.push_back(std::chrono::duration<double, std::nano>(t2 - t1).count());
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  const double med_batched = median(batched_ns);
  const double med_sequential = median(sequential_ns);
  std::cout << json{{"batched_ns", med_batched},
                    {"sequential_ns", med_sequential},
                    {"speedup", med_sequential / med_batched}}
                   .dump()
            << "\n";
}

void cmd_adapter_info(const std::vector<std::string>& files) {
  for (const auto& file : files) {
    const LoraAdapter adapter = load_adapter(file);
    std::cout << json{{"file", file},
                      {"id", adapter.id},
                      {"language", adapter.language},
                      {"rank", adapter.rank},
                      {"dim", adapter.dim},
                      {"scale", adapter.scale}}
                     .dump()
              << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"retrieveall: multi-adapter serving pipeline with retrieval-augmented prompts"};
  app.require_subcommand(1);

  ConfigLayer ib_cfg, route_cfg, infer_cfg, eval_cfg, bench_cfg;

  auto* ib = app.add_subcommand("index-build", "build an example index from a JSONL corpus");
  std::string ib_corpus, ib_out;
  ib->add_option("corpus", ib_corpus, "corpus JSONL path")->required();
  ib->add_option("--out,-o", ib_out, "output index path")->required();
  ib_cfg.attach(ib);
  ib->callback([&]() { cmd_index_build(ib_cfg, ib_corpus, ib_out); });

  auto* rt = app.add_subcommand("route", "infer language and adapter for input text");
  std::string rt_index;
  std::vector<std::string> rt_texts;
  bool rt_stdin = false;
  rt->add_option("--index", rt_index, "index file")->required();
  rt->add_option("text", rt_texts, "input text (repeatable)");
  rt->add_flag("--stdin", rt_stdin, "read input lines from standard input");
  route_cfg.attach(rt);
  rt->callback([&]() { cmd_route(route_cfg, rt_index, rt_texts, rt_stdin); });

  auto* inf = app.add_subcommand("infer", "run the serving pipeline over a corpus");
  std::string inf_index, inf_corpus;
  inf->add_option("--index", inf_index, "index file")->required();
  inf->add_option("--corpus", inf_corpus, "corpus JSONL path")->required();
  infer_cfg.attach(inf);
  inf->callback([&]() { cmd_infer(infer_cfg, inf_index, inf_corpus); });

  auto* ev = app.add_subcommand("eval", "score the pipeline over a labeled corpus");
  std::string ev_index, ev_corpus, ev_out;
  bool ev_csv = false;
  ev->add_option("--index", ev_index, "index file")->required();
  ev->add_option("--corpus", ev_corpus, "corpus JSONL path")->required();
  ev->add_option("--out,-o", ev_out, "write the report here instead of stdout");
  ev->add_flag("--csv", ev_csv, "flat per-language CSV instead of JSON");
  eval_cfg.attach(ev);
  ev->callback([&]() { cmd_eval(eval_cfg, ev_index, ev_corpus, ev_csv, ev_out); });

  auto* bench = app.add_subcommand("bench", "batched vs sequential forward throughput");
  int bn_d = 256, bn_r = 8, bn_b = 64, bn_l = 16, bn_p = 4, bn_repeats = 10;
  bench->add_option("--d", bn_d, "feature dim");
  bench->add_option("--r", bn_r, "adapter rank");
  bench->add_option("--b", bn_b, "batch size");
  bench->add_option("--l", bn_l, "sequence length");
  bench->add_option("--p", bn_p, "unique adapters");
  bench->add_option("--repeats", bn_repeats, "timing repeats (median reported)");
  bench_cfg.attach(bench);
  bench->callback(
      [&]() { cmd_bench(bench_cfg, bn_d, bn_r, bn_b, bn_l, bn_p, bn_repeats); });

  auto* info = app.add_subcommand("adapter-info", "print adapter file headers");
  std::vector<std::string> info_files;
  info->add_option("files", info_files, "*.lora files")->required();
  info->callback([&]() { cmd_adapter_info(info_files); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const retrieveall::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
