#pragma once

/*
 * JSON campaign-config loader, kept out of sim.hpp so the heavy JSON
 * header is only paid for by the CLI and the config tests. All keys are
 * optional and override the desk-scale defaults; unknown keys are
 * rejected so typos fail loudly.
 */

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "sim.hpp"

namespace otfdm {

inline CampaignConfig campaign_config_from_json(const nlohmann::json& j) {
    CampaignConfig c;
    static const char* known[] = {
        "m",           "n",        "n_cp",          "delta_f_hz",       "f_c_hz",
        "waveforms",   "equalizer", "csi",          "pilot_lambda",     "pilot_width",
        "pilot_boost_db", "rms_ds_ns", "symmetric_doppler", "max_speeds_kmh", "snrs_db",
        "drops",       "master_seed", "out",        "ldpc_k",           "ofdm_short_cp",
        "threads"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || (it.key() == k);
        if (!ok) throw std::invalid_argument("unknown config key: " + it.key());
    }

    if (j.contains("m")) c.m = j.at("m").get<int>();
    if (j.contains("n")) c.n = j.at("n").get<int>();
    if (j.contains("n_cp")) c.n_cp = j.at("n_cp").get<int>();
    if (j.contains("delta_f_hz")) c.delta_f = j.at("delta_f_hz").get<double>();
    if (j.contains("f_c_hz")) c.f_c = j.at("f_c_hz").get<double>();
    if (j.contains("waveforms")) {
        c.waveforms.clear();
        for (const auto& w : j.at("waveforms"))
            c.waveforms.push_back(parse_sim_waveform(w.get<std::string>()));
    }
    if (j.contains("equalizer")) c.equalizer = parse_equalizer(j.at("equalizer").get<std::string>());
    if (j.contains("csi")) c.csi = parse_csi(j.at("csi").get<std::string>());
    if (j.contains("pilot_lambda")) c.pilot_lambda = j.at("pilot_lambda").get<int>();
    if (j.contains("pilot_width")) c.pilot_width = j.at("pilot_width").get<int>();
    if (j.contains("pilot_boost_db")) c.pilot_boost_db = j.at("pilot_boost_db").get<double>();
    if (j.contains("rms_ds_ns")) c.rms_ds = j.at("rms_ds_ns").get<double>() * 1e-9;
    if (j.contains("symmetric_doppler")) c.symmetric_doppler = j.at("symmetric_doppler").get<bool>();
    if (j.contains("max_speeds_kmh"))
        c.max_speeds_kmh = j.at("max_speeds_kmh").get<std::vector<double>>();
    if (j.contains("snrs_db")) c.snrs_db = j.at("snrs_db").get<std::vector<double>>();
    if (j.contains("drops")) c.drops = j.at("drops").get<int>();
    if (j.contains("master_seed")) c.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
    if (j.contains("ldpc_k")) c.ldpc_k = j.at("ldpc_k").get<int>();
    if (j.contains("ofdm_short_cp")) c.ofdm_short_cp = j.at("ofdm_short_cp").get<int>();
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    return c;
}

inline CampaignConfig load_campaign_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config: " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error("config parse error in " + path + ": " + e.what());
    }
    return campaign_config_from_json(j);
}

}  // namespace otfdm
