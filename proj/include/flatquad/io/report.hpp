#ifndef FLATQUAD_IO_REPORT_HPP
#define FLATQUAD_IO_REPORT_HPP

#include "flatquad/sim.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <cstdio>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace flatquad::io
{

    inline constexpr const char *kToolVersion = "0.1.0";

    /// Lower-case hex SHA-256 of the bytes.
    inline std::string sha256_hex(std::string_view bytes)
    {
        std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
            EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
            EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
            throw Error("sha256 failed");
        std::string hex;
        char buf[3];
        for (unsigned int i = 0; i < len; ++i)
        {
            std::snprintf(buf, sizeof buf, "%02x", md[i]);
            hex += buf;
        }
        return hex;
    }

    inline nlohmann::json metrics_json(const Metrics &m)
    {
        return {{"iae", m.iae},
                {"max_position_error", m.max_position_error},
                {"max_tilt", m.max_tilt},
                {"saturation_count", m.saturation_count},
                {"rate_limit_count", m.rate_limit_count},
                {"max_rotor_speed", m.max_rotor_speed},
                {"max_rotor_accel", m.max_rotor_accel}};
    }

    inline Metrics metrics_from_json(const nlohmann::json &j)
    {
        Metrics m;
        m.iae = j.at("iae").get<double>();
        m.max_position_error = j.at("max_position_error").get<double>();
        m.max_tilt = j.at("max_tilt").get<double>();
        m.saturation_count = j.at("saturation_count").get<int>();
        m.rate_limit_count = j.at("rate_limit_count").get<int>();
        m.max_rotor_speed = j.at("max_rotor_speed").get<double>();
        m.max_rotor_accel = j.at("max_rotor_accel").get<double>();
        return m;
    }

    struct RunEntry
    {
        StrategyKind strategy = StrategyKind::Combined;
        std::string wind; // wind kind name
        std::optional<Metrics> metrics;
        std::string error;
    };

    struct RunReport
    {
        std::string scenario;        // path as given
        std::string scenario_sha256; // digest of the file bytes
        std::string version = kToolVersion;
        std::vector<RunEntry> runs;
    };

    inline nlohmann::json report_json(const RunReport &r)
    {
        nlohmann::json runs = nlohmann::json::array();
        for (const RunEntry &e : r.runs)
        {
            nlohmann::json j{{"strategy", std::string(to_string(e.strategy))}, {"wind", e.wind}};
            if (e.metrics)
                j["metrics"] = metrics_json(*e.metrics);
            else
                j["error"] = e.error;
            runs.push_back(std::move(j));
        }
        return {{"tool", "flatquad"},
                {"version", r.version},
                {"scenario", r.scenario},
                {"scenario_sha256", r.scenario_sha256},
                {"runs", runs}};
    }

    inline RunReport report_from_json(const nlohmann::json &j)
    {
        RunReport r;
        r.version = j.at("version").get<std::string>();
        r.scenario = j.at("scenario").get<std::string>();
        r.scenario_sha256 = j.at("scenario_sha256").get<std::string>();
        for (const auto &e : j.at("runs"))
        {
            RunEntry entry;
            entry.strategy = strategy_from_string(e.at("strategy").get<std::string>());
            entry.wind = e.at("wind").get<std::string>();
            if (e.contains("metrics"))
                entry.metrics = metrics_from_json(e.at("metrics"));
            else
                entry.error = e.at("error").get<std::string>();
            r.runs.push_back(std::move(entry));
        }
        return r;
    }

} // namespace flatquad::io

#endif
