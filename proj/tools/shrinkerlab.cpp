#include "shrinker/analysis.hpp"
#include "shrinker/gaussmetric.hpp"
#include "shrinker/mesh_io.hpp"
#include "shrinker/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

using namespace shrinker;

namespace {

struct SeedArgs {
  std::string family = "one_end";
  std::vector<int> g;
  std::optional<int> n;
  std::optional<double> t, fillet, edge, radius, grade;
  bool prismatic = false;
};

void add_seed_flags(CLI::App* cmd, SeedArgs& a, bool many_g) {
  cmd->add_option("--family", a.family, "one_end or two_end")->check(CLI::IsMember({"one_end", "two_end"}));
  auto* g = cmd->add_option("--g", a.g, "genus (one_end)");
  if (!many_g) g->expected(1);
  cmd->add_option("--n", a.n, "neck count per circle (two_end)");
  cmd->add_option("--t", a.t, "sweepout parameter in (0,1)");
  cmd->add_option("--fillet", a.fillet, "neck half-width");
  cmd->add_option("--edge", a.edge, "edge length near the origin");
  cmd->add_option("--radius", a.radius, "clip radius");
  cmd->add_option("--grade-radius", a.grade, "radius beyond which edges grow");
  cmd->add_flag("--prismatic", a.prismatic, "two_end: align the necks of both circles (group C_n)");
}

std::vector<SeedSpec> seed_specs(const SeedArgs& a, bool pipeline_defaults) {
  const SeedFamily fam = parse_family(a.family);
  std::vector<int> params;
  if (fam == SeedFamily::OneEnd) {
    if (a.n) throw Error(ErrorKind::InvalidInput, "--n applies to two_end seeds");
    params = a.g.empty() ? std::vector<int>{1} : a.g;
  } else {
    if (!a.g.empty()) throw Error(ErrorKind::InvalidInput, "--g applies to one_end seeds");
    params = {a.n.value_or(7)};
  }
  std::vector<SeedSpec> out;
  for (int p : params) {
    SeedSpec s = pipeline_defaults ? pipeline_seed_defaults(fam, p) : SeedSpec{};
    s.family = fam;
    s.g_or_n = p;
    if (a.t) s.t = *a.t;
    if (a.fillet) s.fillet = *a.fillet;
    if (a.edge) s.target_edge = *a.edge;
    if (a.radius) s.R = *a.radius;
    if (a.grade) s.grade_radius = *a.grade;
    s.prismatic = a.prismatic;
    check_seed_spec(s);
    out.push_back(s);
  }
  return out;
}

std::string stem_of(const SeedSpec& s) {
  return std::string(to_string(s.family)) + (s.family == SeedFamily::OneEnd ? "_g" : "_n") + std::to_string(s.g_or_n);
}

void emit(const Json& j, const std::string& path) {
  if (path.empty())
    std::cout << dump(j);
  else
    write_json(path, j);
}

void print_summary(const RunReport& r) {
  std::cout << stem_of(r.spec) << ": " << r.status << " (" << r.stage << ")  F=" << r.F
            << "  rms=" << r.residual_rms << "  genus=" << r.genus << "  ends=" << r.end_count
            << "  defect=" << r.equivariance_defect << "  angle_max=" << r.boundary_angle.max_deg
            << "  axis_hits=" << r.axis_hits << "  triangles=" << r.triangles << "  " << r.wall_time << "s\n";
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Search for equivariant self-shrinking surfaces on triangle meshes"};
  app.require_subcommand(1);

  SeedArgs seed_args;
  std::string seed_out;
  auto* seed = app.add_subcommand("seed", "write a desingularized seed mesh");
  add_seed_flags(seed, seed_args, false);
  seed->add_option("--out", seed_out, "output mesh (.obj or .ply)")->required();

  std::string ev_in, ev_out, ev_group = "auto", ev_config, ev_trace, ev_phase = "both";
  int ev_ckpt = 0;
  auto* evolve = app.add_subcommand("evolve", "descend and refine a mesh");
  evolve->add_option("--in", ev_in, "input mesh")->required()->check(CLI::ExistingFile);
  evolve->add_option("--group", ev_group, "trivial, C<n>, D<n> or auto (largest dihedral symmetry found)");
  evolve->add_option("--config", ev_config, "JSON with EvolveConfig fields")->check(CLI::ExistingFile);
  evolve->add_option("--checkpoint-every", ev_ckpt, "write mesh and trace every N iterations")->check(CLI::NonNegativeNumber);
  evolve->add_option("--phase", ev_phase, "both, descend or refine")->check(CLI::IsMember({"both", "descend", "refine"}));
  evolve->add_option("--trace", ev_trace, "trace JSON (default: <out>.trace.json)");
  evolve->add_option("--out", ev_out, "output mesh")->required();

  std::string an_in, an_report, an_group = "trivial";
  double an_radius = 8.0, an_tube = 0.5;
  auto* analyze = app.add_subcommand("analyze", "report invariants of a clipped mesh");
  analyze->add_option("--in", an_in, "input mesh")->required()->check(CLI::ExistingFile);
  analyze->add_option("--group", an_group, "group for the equivariance defect");
  analyze->add_option("--radius", an_radius, "clip radius");
  analyze->add_option("--tube", an_tube, "tube radius around the circle excluded from the distance");
  analyze->add_option("--report", an_report, "report JSON (default: stdout)");

  int ws_g = 1, ws_samples = 99;
  std::string ws_report;
  auto* ws = app.add_subcommand("widthscan", "Gaussian area along the sweepout family");
  ws->add_option("--g", ws_g, "genus")->check(CLI::PositiveNumber);
  ws->add_option("--samples", ws_samples, "interior samples")->check(CLI::Range(3, 100000));
  ws->add_option("--report", ws_report, "report JSON (default: stdout)");

  std::string vf_report;
  auto* verify = app.add_subcommand("verify", "plane, sphere and cylinder against closed forms");
  verify->add_option("--report", vf_report, "report JSON (default: stdout)");

  SeedArgs pl_args;
  std::string pl_config, pl_dir = ".", pl_ckpt_dir;
  int pl_ckpt = 0, pl_jobs = 1, pl_restarts = 2;
  auto* pipeline = app.add_subcommand("pipeline", "seed, evolve and analyze; several --g values run as a batch");
  add_seed_flags(pipeline, pl_args, true);
  pipeline->add_option("--config", pl_config, "JSON with EvolveConfig fields")->check(CLI::ExistingFile);
  pipeline->add_option("--out-dir", pl_dir, "directory for <stem>.obj, <stem>.json, <stem>.trace.json");
  pipeline->add_option("--checkpoint-every", pl_ckpt, "checkpoint every N iterations")->check(CLI::NonNegativeNumber);
  pipeline->add_option("--checkpoint-dir", pl_ckpt_dir, "checkpoint directory (default: --out-dir)");
  pipeline->add_option("--max-restarts", pl_restarts, "descent restarts after a refinement stall")->check(CLI::NonNegativeNumber);
  pipeline->add_option("--jobs", pl_jobs, "concurrent runs")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*seed) {
      TriMesh m = make_seed(seed_specs(seed_args, false).front());
      export_mesh(m, seed_out);
      std::cout << seed_out << ": " << m.num_vertices() << " vertices, " << m.num_triangles() << " triangles\n";
      return 0;
    }

    if (*evolve) {
      TriMesh m = import_mesh(ev_in);
      EvolveConfig cfg = ev_config.empty() ? EvolveConfig{} : load_config(ev_config);
      SymmetryGroup group = trivial_group();
      if (ev_group == "auto") {
        // Largest D_n under which the mesh is invariant, falling back to C_n and then trivial.
        for (int n = 24; n >= 2 && group.order() == 1; --n) {
          for (SymmetryGroup cand : {dihedral_group(n), cyclic_group(n)}) {
            if (group.order() == 1 && equivariance_defect(m, cand) < 1e-6 * cfg.R) group = cand;
          }
        }
      } else {
        group = parse_group(ev_group);
      }
      const std::string dir = std::filesystem::path(ev_out).parent_path().string();
      const std::string stem = std::filesystem::path(ev_out).stem().string();
      EvolveHooks hooks;
      hooks.checkpoint_every = ev_ckpt;
      if (ev_ckpt > 0) {
        hooks.checkpoint = [&](const TriMesh& mesh, const EvolveTrace& tr) {
          write_checkpoint(dir.empty() ? "." : dir, stem + ".checkpoint", mesh, tr);
        };
      }
      const std::string trace_path = ev_trace.empty() ? ev_out + ".trace.json" : ev_trace;
      Json trace = Json::array();
      try {
        if (ev_phase != "refine") {
          EvolveResult a = descend(m, group, cfg, hooks);
          trace.push_back(a.trace);
          m = std::move(a.mesh);
        }
        if (ev_phase != "descend") {
          EvolveResult b = refine_critical(m, group, cfg, hooks);
          trace.push_back(b.trace);
          m = std::move(b.mesh);
        }
      } catch (const SolverError& e) {
        trace.push_back(e.trace());
        write_json(trace_path, trace);
        export_mesh(e.last_mesh(), ev_out);
        std::cerr << "evolve: " << to_string(e.kind()) << ": " << e.what() << " (last iterate in " << ev_out << ")\n";
        return exit_code_for(e.kind());
      }
      write_json(trace_path, trace);
      export_mesh(m, ev_out);
      std::cout << ev_out << ": group " << group.name() << ", F=" << discrete_gauss_area(m).total
                << ", rms=" << variational_residual(m).rms_weighted << "\n";
      return 0;
    }

    if (*analyze) {
      TriMesh m = import_mesh(an_in);
      RunReport r = analyze_mesh(m, parse_group(an_group), an_radius, an_tube);
      Json j = report_json(r);
      for (const char* k : {"spec", "config", "trace_summary", "wall_time", "stop_reason", "checkpoint_path"}) j.erase(k);
      emit(j, an_report);
      return 0;
    }

    if (*ws) {
      emit(Json(width_scan(ws_g, ws_samples)), ws_report);
      return 0;
    }

    if (*verify) {
      VerifyReport r = verify_known_shrinkers();
      emit(Json(r), vf_report);
      return r.pass ? 0 : 1;
    }

    if (*pipeline) {
      std::vector<SeedSpec> specs = seed_specs(pl_args, true);
      EvolveConfig cfg = pipeline_config_defaults();
      if (!pl_config.empty()) cfg = load_config(pl_config, cfg);
      std::filesystem::create_directories(pl_dir);
      PipelineOptions opts;
      opts.checkpoint_every = pl_ckpt;
      opts.checkpoint_dir = pl_ckpt > 0 ? (pl_ckpt_dir.empty() ? pl_dir : pl_ckpt_dir) : "";
      opts.max_restarts = pl_restarts;

      std::mutex io;
      std::vector<int> codes(specs.size(), 0);
      auto run_one = [&](std::size_t i) {
        const SeedSpec& s = specs[i];
        const std::filesystem::path base = std::filesystem::path(pl_dir) / stem_of(s);
        try {
          TriMesh mesh;
          RunReport r = run_pipeline(s, cfg, opts, &mesh);
          export_mesh(mesh, base.string() + ".obj");
          write_json(base.string() + ".trace.json", Json(r.trace));
          write_json(base.string() + ".json", report_json(r));
          std::lock_guard lock(io);
          print_summary(r);
        } catch (const PipelineError& e) {
          write_json(base.string() + ".trace.json", Json(e.report().trace));
          write_json(base.string() + ".json", report_json(e.report()));
          std::lock_guard lock(io);
          print_summary(e.report());
          std::cerr << stem_of(s) << ": " << to_string(e.kind()) << ": " << e.what() << "\n";
          codes[i] = exit_code_for(e.kind());
        } catch (const Error& e) {
          std::lock_guard lock(io);
          std::cerr << stem_of(s) << ": " << to_string(e.kind()) << ": " << e.what() << "\n";
          codes[i] = exit_code_for(e.kind());
        }
      };
      std::vector<std::thread> workers;
      std::size_t next = 0;
      std::mutex queue;
      for (int w = 0; w < std::min<int>(pl_jobs, static_cast<int>(specs.size())); ++w) {
        workers.emplace_back([&] {
          for (;;) {
            std::size_t i;
            {
              std::lock_guard lock(queue);
              if (next >= specs.size()) return;
              i = next++;
            }
            run_one(i);
          }
        });
      }
      for (auto& t : workers) t.join();
      return *std::max_element(codes.begin(), codes.end());
    }
  } catch (const Error& e) {
    std::cerr << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
