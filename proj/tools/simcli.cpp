// Command-line front end for the Monte-Carlo campaign engine.
//
// Configuration comes from an optional JSON file (--config) with CLI
// overrides on top; with no arguments it runs the desk-scale default
// campaign. The aggregated CSV goes to --out and is echoed to stdout;
// progress and diagnostics go to stderr. Exit status: 0 on success,
// 2 on a configuration/feasibility error, 3 on an I/O failure.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "otfdm/config_io.hpp"
#include "otfdm/otfdm.hpp"

namespace {

std::string snapshot_prefix(const std::string& out_path) {
    std::string stem = out_path;
    const std::string ext = ".csv";
    if (stem.size() > ext.size() && stem.compare(stem.size() - ext.size(), ext.size(), ext) == 0)
        stem.resize(stem.size() - ext.size());
    return stem + "_snapshot";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"OTFDM link-level Monte-Carlo simulator"};

    std::string config_path;
    std::string out_path;
    std::string dump_iq_path;
    std::vector<std::string> waveform_names;
    std::string equalizer_name_s, csi_name_s;
    std::vector<double> speeds, snrs;
    int drops = 0;
    std::uint64_t seed = 0;
    int threads = 0;
    bool snapshot = false;
    bool timing = false;

    app.add_option("--config", config_path, "JSON config file (keys documented in README)");
    app.add_option("--drops", drops, "Monte-Carlo drops per sweep cell");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--speeds", speeds, "max speeds to sweep [km/h]")->delimiter(',');
    app.add_option("--snrs", snrs, "SNRs to sweep [dB]")->delimiter(',');
    app.add_option("--out", out_path, "output CSV path");
    app.add_option("--waveforms", waveform_names,
                   "waveforms: ofdm, ofdm_short, otfdm, otfdm_dfts")
        ->delimiter(',');
    app.add_option("--equalizer", equalizer_name_s, "OTFDM equalizer: td_eq or lmmse");
    app.add_option("--csi", csi_name_s, "channel knowledge: genie or estimated");
    app.add_option("--threads", threads, "worker threads (output is identical at any level)");
    app.add_flag("--snapshot", snapshot,
                 "write truth/estimate channel grids next to the CSV (drop 0, first cell)");
    app.add_option("--dump-iq", dump_iq_path,
                   "write drop-0 transmit frames as float64 LE interleaved re/im");
    app.add_flag("--timing", timing, "fill the wall_ms CSV column (breaks byte-reproducibility)");

    CLI11_PARSE(app, argc, argv);

    otfdm::CampaignConfig cfg;
    try {
        if (!config_path.empty()) cfg = otfdm::load_campaign_config(config_path);
        if (app.count("--drops")) cfg.drops = drops;
        if (app.count("--seed")) cfg.master_seed = seed;
        if (app.count("--speeds")) cfg.max_speeds_kmh = speeds;
        if (app.count("--snrs")) cfg.snrs_db = snrs;
        if (app.count("--out")) cfg.out = out_path;
        if (app.count("--waveforms")) {
            cfg.waveforms.clear();
            for (const std::string& w : waveform_names)
                cfg.waveforms.push_back(otfdm::parse_sim_waveform(w));
        }
        if (app.count("--equalizer")) cfg.equalizer = otfdm::parse_equalizer(equalizer_name_s);
        if (app.count("--csi")) cfg.csi = otfdm::parse_csi(csi_name_s);
        if (app.count("--threads")) cfg.threads = threads;
        cfg.timing = timing;
        otfdm::validate_campaign_config(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    std::fprintf(stderr,
                 "frame %dx%d cp=%d | %zu waveform(s), eq=%s, csi=%s | "
                 "%zu speed(s) x %zu snr(s) x %d drops | seed %llu\n",
                 cfg.m, cfg.n, cfg.n_cp, cfg.waveforms.size(),
                 otfdm::equalizer_name(cfg.equalizer), otfdm::csi_name(cfg.csi),
                 cfg.max_speeds_kmh.size(), cfg.snrs_db.size(), cfg.drops,
                 static_cast<unsigned long long>(cfg.master_seed));

    try {
        if (!dump_iq_path.empty()) {
            const otfdm::CampaignContext ctx = otfdm::make_context(cfg);
            const otfdm::DropTx tx = otfdm::build_drop_tx(ctx, 0);
            for (size_t wi = 0; wi < cfg.waveforms.size(); ++wi) {
                std::string path = dump_iq_path;
                if (cfg.waveforms.size() > 1)
                    path += std::string(".") + otfdm::sim_waveform_name(cfg.waveforms[wi]) + ".iq";
                otfdm::dump_iq(tx.frames[wi].samples, path);
                std::fprintf(stderr, "wrote IQ dump %s (%zu samples)\n", path.c_str(),
                             tx.frames[wi].samples.size());
            }
        }

        if (snapshot) {
            const otfdm::SnapshotResult snap =
                otfdm::emit_channel_snapshot(cfg, snapshot_prefix(cfg.out));
            std::fprintf(stderr, "snapshot NMSE %.3f dB -> %s, %s, %s, %s\n",
                         10.0 * std::log10(snap.nmse), snap.truth_abs_path.c_str(),
                         snap.est_abs_path.c_str(), snap.truth_path.c_str(),
                         snap.est_path.c_str());
        }

        const auto t0 = std::chrono::steady_clock::now();
        const std::vector<otfdm::CellAggregate> rows =
            otfdm::run_campaign(cfg, [](long long done, long long total) {
                std::fprintf(stderr, "\rdrop %lld/%lld", done, total);
                if (done == total) std::fprintf(stderr, "\n");
            });
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::fprintf(stderr, "campaign finished in %.1f s\n", secs);

        otfdm::save_campaign_csv(rows, cfg.timing, cfg.out);
        std::fprintf(stderr, "wrote %s\n", cfg.out.c_str());
        std::ostringstream echo;
        otfdm::write_campaign_csv(rows, cfg.timing, echo);
        std::fputs(echo.str().c_str(), stdout);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.what() && std::string(e.what()).find("infeasible") != std::string::npos ? 2 : 3;
    }
    return 0;
}
