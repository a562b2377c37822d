// telca: command-line front end for the telephone-network cellular automaton.
//
//   telca simulate  busy-count series as CSV
//   telca rs        R/S curve and Hurst estimate for a series, a curve or a fresh run
//   telca sweep     (lambda, mu) grid averaged over realizations
//   telca render    ASCII or PPM frames of the grid
//
// Exit codes: 0 success, 1 usage error, 2 runtime or I/O error.

#include "telca/analysis.hpp"
#include "telca/automaton.hpp"
#include "telca/error.hpp"
#include "telca/experiments.hpp"
#include "telca/io.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Writes the whole buffer in one go so failed runs leave no partial file.
void emit(const std::string& path, const std::string& content)
{
    if (path == "-") {
        std::cout << content;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << content;
    if (!out.flush()) {
        throw IoError("failed writing '" + path + "'");
    }
}

// Applies `key=value` lines to options of `cmd` that were not given on the
// command line. Keys are long option names without the leading dashes.
void merge_config(CLI::App& cmd, const std::string& path)
{
    for (const auto& item : CLI::ConfigINI{}.from_file(path)) {
        if (item.name == "++" || item.name == "--") {
            continue;  // section markers
        }
        if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == "default")) {
            throw telca::ParameterError("config: sections are not supported ('" + item.fullname() + "')");
        }
        CLI::Option* opt = cmd.get_option_no_throw("--" + item.name);
        if (opt == nullptr || item.name == "config") {
            throw telca::ParameterError("config: unknown key '" + item.name + "'");
        }
        if (opt->count() > 0) {
            continue;
        }
        for (const auto& input : item.inputs) {
            opt->add_result(input);
        }
        opt->run_callback();
    }
}

void add_model_flags(CLI::App& cmd, telca::SimParams& p)
{
    cmd.add_option("--lambda", p.lambda, "Call rate per cycle")->capture_default_str();
    cmd.add_option("--mu", p.mu, "Service rate per cycle")->capture_default_str();
    cmd.add_option("--width", p.width, "Field width in cells")->capture_default_str();
    cmd.add_option("--height", p.height, "Field height in cells")->capture_default_str();
    cmd.add_option("--cycles", p.cycles, "Number of cycles to simulate")->capture_default_str();
}

struct SimulateCmd {
    telca::SimParams params;
    std::string output = "-";

    void run() const
    {
        params.validate();
        std::ostringstream buf;
        telca::io::write_series_csv(buf, telca::run(params));
        emit(output, buf.str());
    }
};

struct RsCmd {
    std::string input;
    telca::SimParams params;
    bool seed_given = false;
    std::size_t burn_in = 0;
    std::size_t min_n = 16;
    std::size_t points_per_decade = 10;
    std::string output = "-";

    void run() const
    {
        telca::RsCurve curve;
        if (!input.empty()) {
            telca::io::TableInput table;
            if (input == "-") {
                table = telca::io::read_table(std::cin);
            } else {
                std::ifstream in(input);
                if (!in) {
                    throw IoError("cannot open '" + input + "' for reading");
                }
                table = telca::io::read_table(in);
            }
            if (auto* points = std::get_if<std::vector<telca::RsPoint>>(&table)) {
                curve.points = std::move(*points);
            } else {
                const auto& series = std::get<std::vector<double>>(table);
                if (burn_in >= series.size()) {
                    throw telca::ParameterError("burn-in must be smaller than the series length");
                }
                curve = telca::rs_curve(std::span<const double>{series}.subspan(burn_in), min_n,
                                        points_per_decade);
            }
        } else {
            if (!seed_given) {
                throw telca::ParameterError("seed: --seed is required when simulating (no --input)");
            }
            auto p = params;
            p.burn_in = burn_in;
            p.validate();
            const auto counts = telca::run(p);
            const auto series =
                telca::to_series(std::span<const std::size_t>{counts}.subspan(p.burn_in));
            curve = telca::rs_curve(series, min_n, points_per_decade);
        }
        const auto est = telca::estimate_hurst(curve);
        std::ostringstream buf;
        telca::io::write_rs_csv(buf, curve);
        emit(output, buf.str());
        std::cout << telca::io::hurst_summary(est) << '\n';
    }
};

struct SweepCmd {
    telca::SweepSpec spec;
    bool fit_c = false;
    std::string output = "-";

    void run() const
    {
        spec.validate();
        const auto result = telca::sweep(spec);
        std::ostringstream buf;
        telca::io::write_sweep_csv(buf, result);
        if (fit_c) {
            const auto cells = spec.base_params.width * spec.base_params.height;
            telca::io::write_fit_comment(buf, telca::fit_load_constant(result, cells));
        }
        emit(output, buf.str());
    }
};

struct RenderCmd {
    telca::SimParams params;
    std::size_t frame_every = 1;
    std::string format = "ascii";
    std::string output_dir = "frames";
    std::size_t scale = 8;

    void run() const
    {
        params.validate();
        if (frame_every == 0) {
            throw telca::ParameterError("frame-every must be at least 1");
        }
        if (scale == 0) {
            throw telca::ParameterError("scale must be at least 1");
        }
        const bool ascii = format == "ascii";
        const bool to_stdout = output_dir == "-";
        if (to_stdout && !ascii) {
            throw telca::ParameterError("output-dir: PPM frames need a directory, not stdout");
        }
        if (!to_stdout) {
            std::error_code ec;
            std::filesystem::create_directories(output_dir, ec);
            if (ec) {
                throw IoError("cannot create directory '" + output_dir + "': " + ec.message());
            }
        }

        telca::Simulation sim(params);
        const auto frame = [&] {
            const auto& grid = sim.grid();
            std::ostringstream buf;
            if (ascii) {
                if (to_stdout) {
                    buf << fmt::format("# cycle={} busy={}\n", grid.cycle(), telca::busy_count(grid));
                }
                telca::io::write_ascii_frame(buf, grid);
            } else {
                telca::io::write_ppm_frame(buf, grid, scale);
            }
            if (to_stdout) {
                emit("-", buf.str());
            } else {
                const auto name = fmt::format("frame_{:06}.{}", grid.cycle(), ascii ? "txt" : "ppm");
                emit((std::filesystem::path(output_dir) / name).string(), buf.str());
            }
        };
        frame();
        for (std::size_t t = 1; t <= params.cycles; ++t) {
            sim.step();
            if (t % frame_every == 0) {
                frame();
            }
        }
    }
};

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Cellular-automaton telephone network simulator with R/S analysis"};
    app.require_subcommand(1);

    SimulateCmd simulate;
    auto* sim_cmd = app.add_subcommand("simulate", "Write the busy-count series as CSV");
    add_model_flags(*sim_cmd, simulate.params);
    sim_cmd->add_option("--seed", simulate.params.seed, "RNG seed")->required();
    sim_cmd->add_option("-o,--output", simulate.output, "Output path, '-' for stdout")
        ->capture_default_str();

    RsCmd rs;
    auto* rs_cmd = app.add_subcommand("rs", "R/S curve and Hurst estimate");
    rs_cmd->add_option("-i,--input", rs.input,
                       "CSV with a series (busy_count/value/last column) or an n,rs curve; '-' "
                       "for stdin. Without it a fresh simulation is analysed");
    add_model_flags(*rs_cmd, rs.params);
    auto* rs_seed = rs_cmd->add_option("--seed", rs.params.seed, "RNG seed for the simulation");
    rs_cmd->add_option("--burn-in", rs.burn_in, "Leading values to discard")->capture_default_str();
    rs_cmd->add_option("--min-n", rs.min_n, "Shortest prefix length")->capture_default_str();
    rs_cmd->add_option("--points-per-decade", rs.points_per_decade, "Prefix density")
        ->capture_default_str();
    rs_cmd->add_option("-o,--output", rs.output, "Curve CSV path, '-' for stdout")
        ->capture_default_str();

    SweepCmd sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Average mean load and H over a (lambda, mu) grid");
    std::string sweep_config;
    sweep_cmd
        ->add_option("--config", sweep_config,
                     "key=value file with any of the long options below; flags take precedence")
        ->check(CLI::ExistingFile);
    auto* lambdas_opt =
        sweep_cmd->add_option("--lambdas", sweep.spec.lambdas, "Comma-separated call rates (required)")
            ->delimiter(',');
    auto* mus_opt =
        sweep_cmd->add_option("--mus", sweep.spec.mus, "Comma-separated service rates (required)")
            ->delimiter(',');
    sweep_cmd->add_option("--realizations", sweep.spec.realizations, "Seeds per grid point")
        ->capture_default_str();
    sweep_cmd->add_option("--width", sweep.spec.base_params.width)->capture_default_str();
    sweep_cmd->add_option("--height", sweep.spec.base_params.height)->capture_default_str();
    sweep_cmd->add_option("--cycles", sweep.spec.base_params.cycles)->capture_default_str();
    sweep_cmd->add_option("--burn-in", sweep.spec.base_params.burn_in)->capture_default_str();
    auto* seed_base_opt =
        sweep_cmd->add_option("--seed-base", sweep.spec.seed_base, "Seed of realization 0 (required)");
    sweep_cmd->add_option("--min-n", sweep.spec.analysis.min_n)->capture_default_str();
    sweep_cmd->add_option("--points-per-decade", sweep.spec.analysis.points_per_decade)
        ->capture_default_str();
    sweep_cmd->add_option("--threads", sweep.spec.threads, "Worker threads, 0 = all cores")
        ->capture_default_str();
    sweep_cmd->add_flag("--fit-c", sweep.fit_c, "Append '# C=<value> rms=<value>' load-law fit");
    sweep_cmd->add_option("-o,--output", sweep.output, "Output path, '-' for stdout")
        ->capture_default_str();

    RenderCmd render;
    render.params.cycles = 100;
    auto* render_cmd = app.add_subcommand("render", "Write grid frames (ASCII counters or PPM)");
    add_model_flags(*render_cmd, render.params);
    render_cmd->add_option("--seed", render.params.seed, "RNG seed")->required();
    render_cmd->add_option("--frame-every", render.frame_every, "Cycles between frames")
        ->capture_default_str();
    render_cmd->add_option("--format", render.format)
        ->check(CLI::IsMember({"ascii", "ppm"}))
        ->capture_default_str();
    render_cmd->add_option("--output-dir", render.output_dir, "Frame directory, '-' for stdout (ascii)")
        ->capture_default_str();
    render_cmd->add_option("--scale", render.scale, "Pixels per cell in PPM frames")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
        if (*sweep_cmd) {
            if (!sweep_config.empty()) {
                merge_config(*sweep_cmd, sweep_config);
            }
            for (const auto* opt : {lambdas_opt, mus_opt, seed_base_opt}) {
                if (opt->count() == 0) {
                    throw CLI::RequiredError(opt->get_name());
                }
            }
        }
    } catch (const telca::ParameterError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageError;
    }

    try {
        if (*sim_cmd) {
            simulate.run();
        } else if (*rs_cmd) {
            rs.seed_given = rs_seed->count() > 0;
            rs.run();
        } else if (*sweep_cmd) {
            sweep.run();
        } else if (*render_cmd) {
            render.run();
        }
    } catch (const telca::ParameterError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const telca::ConfigurationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const telca::InsufficientData& e) {
        std::cerr << "error: insufficient data: " << e.what() << '\n';
        return kRuntimeError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return 0;
}
