#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sepris/contract.hpp"
#include "sepris/dab.hpp"
#include "sepris/drbg.hpp"
#include "sepris/envelope.hpp"
#include "sepris/frame.hpp"
#include "sepris/hash.hpp"
#include "sepris/ledger.hpp"
#include "sepris/metrics.hpp"
#include "sepris/network.hpp"
#include "sepris/storage.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

std::string home_dir() {
    if (const char* env = std::getenv("SEPRIS_HOME"); env && *env) return env;
    return "sepris-home";
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw sepris::Error(sepris::Errc::IoError, "cannot read file: " + path);
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

sepris::Bytes read_binary_file(const std::string& path) {
    const std::string s = read_text_file(path);
    return sepris::Bytes(s.begin(), s.end());
}

void write_file(const std::string& path, sepris::BytesView data) {
    if (const fs::path parent = fs::path(path).parent_path(); !parent.empty()) {
        fs::create_directories(parent);
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw sepris::Error(sepris::Errc::IoError, "cannot write file: " + path);
    f.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
    if (!f) throw sepris::Error(sepris::Errc::IoError, "short write: " + path);
}

void write_file(const std::string& path, const std::string& text) {
    write_file(path, sepris::BytesView(reinterpret_cast<const std::uint8_t*>(text.data()),
                                       text.size()));
}

sepris::dab::DabKeyset load_keyset(const std::string& path) {
    return sepris::dab::keyset_from_json(read_text_file(path));
}

std::string frame_extension(const sepris::FrameBuffer& frame) {
    return frame.channels == 3 ? ".ppm" : ".pgm";
}

// ---- keygen ----------------------------------------------------------------

struct KeygenArgs {
    std::string label;
    std::uint64_t seed = 0;
    std::string dir;
    std::string out;
    bool force = false;
    bool dab = false;
    int quality = 50;
};

int cmd_keygen(const KeygenArgs& args) {
    sepris::Drbg root(args.seed);
    if (args.dab) {
        const std::string out = args.out.empty() ? args.label + ".keyset.json" : args.out;
        if (fs::exists(out) && !args.force) {
            throw sepris::Error(sepris::Errc::DuplicateLabel,
                                "keyset file exists (use --force): " + out);
        }
        sepris::Drbg rng = root.derive("keygen.dab." + args.label);
        sepris::dab::DabKeyset ks;
        rng.fill(ks.aes_key.data(), ks.aes_key.size());
        rng.fill(ks.shuffle_seed.data(), ks.shuffle_seed.size());
        ks.frame_nonce_base = rng.next_u64();
        ks.quality = args.quality;
        if (args.quality < 1 || args.quality > 100) {
            throw sepris::Error(sepris::Errc::InvalidQuality,
                                "quality must be in [1, 100], got " + std::to_string(args.quality));
        }
        write_file(out, sepris::dab::keyset_to_json(ks));
        std::cout << "wrote " << out << "\n";
        return kOk;
    }

    const std::string dir = args.dir.empty() ? (fs::path(home_dir()) / "keys").string() : args.dir;
    fs::create_directories(dir);
    const std::string secret_path = (fs::path(dir) / (args.label + ".key")).string();
    const std::string public_path = (fs::path(dir) / (args.label + ".pub")).string();
    if ((fs::exists(secret_path) || fs::exists(public_path)) && !args.force) {
        throw sepris::Error(sepris::Errc::DuplicateLabel,
                            "key files exist for label (use --force): " + args.label);
    }
    const sepris::Bytes seed_material = root.derive("keygen." + args.label).bytes(32);
    sepris::envelope::KeyPair pair =
        sepris::envelope::generate_keypair(args.label, sepris::BytesView(seed_material));
    sepris::envelope::save_secret_key(secret_path, pair);
    sepris::envelope::save_public_key(public_path, pair);
    std::cout << "wrote " << secret_path << "\n" << "wrote " << public_path << "\n";
    return kOk;
}

// ---- ingest ------------------------------------------------------------------

struct IngestArgs {
    std::string frames_dir;
    std::string camera;
    std::string date;
    std::string start;
    int fps = 2;
    std::string out;
};

int cmd_ingest(const IngestArgs& args) {
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(args.frames_dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext == ".pgm" || ext == ".ppm") paths.push_back(entry.path().string());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) {
        throw sepris::Error(sepris::Errc::EmptyInput,
                            "no .pgm/.ppm frames in " + args.frames_dir);
    }

    sepris::storage::VideoRecord record;
    record.camera_id = args.camera;
    record.date = sepris::contract::parse_date(args.date);
    record.start_time = sepris::contract::parse_time(args.start);
    record.fps = args.fps;
    for (const auto& path : paths) record.frames.push_back(sepris::read_pnm(path));
    sepris::storage::save_video(args.out, record);
    std::cout << "wrote " << args.out << " (" << record.frames.size() << " frames)\n";
    return kOk;
}

// ---- encipher / decipher -----------------------------------------------------

struct CodecArgs {
    std::string input;
    std::string keyset;
    std::string out;
    int quality = 0;
    bool quality_set = false;  // when false, keep the keyset's quality
};

int cmd_encipher(const CodecArgs& args) {
    sepris::dab::DabKeyset ks = load_keyset(args.keyset);
    if (args.quality_set) ks.quality = args.quality;

    std::vector<sepris::FrameBuffer> frames;
    if (fs::path(args.input).extension() == ".sprs") {
        frames = sepris::storage::load_video(args.input).frames;
    } else {
        frames.push_back(sepris::read_pnm(args.input));
    }
    std::vector<sepris::dab::CipherFrame> cipher;
    cipher.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        cipher.push_back(sepris::dab::encipher_frame(frames[i], ks, i));
    }
    const sepris::Bytes stream = sepris::storage::encode_stream(cipher);
    write_file(args.out, sepris::BytesView(stream));
    std::cout << "wrote " << args.out << " (" << cipher.size() << " frames)\n";
    return kOk;
}

int cmd_decipher(const CodecArgs& args) {
    const sepris::dab::DabKeyset ks = load_keyset(args.keyset);
    const sepris::Bytes stream = read_binary_file(args.input);
    const std::vector<sepris::dab::CipherFrame> cipher =
        sepris::storage::decode_stream(sepris::BytesView(stream));
    if (cipher.empty()) {
        throw sepris::Error(sepris::Errc::EmptyInput, "no cipher frames in " + args.input);
    }
    for (std::size_t i = 0; i < cipher.size(); ++i) {
        const sepris::FrameBuffer frame = sepris::dab::decipher_frame(cipher[i], ks);
        char suffix[16];
        std::snprintf(suffix, sizeof suffix, "-%06zu", i);
        sepris::write_pnm(args.out + suffix + frame_extension(frame), frame);
    }
    std::cout << "wrote " << cipher.size() << " frame(s) with prefix " << args.out << "\n";
    return kOk;
}

// ---- metrics -------------------------------------------------------------------

struct MetricsArgs {
    std::string plain;
    std::string keyset;
    std::string json_out;
    bool identity_codec = false;
};

int cmd_metrics(const MetricsArgs& args) {
    const sepris::FrameBuffer plain = sepris::read_pnm(args.plain);
    const sepris::dab::DabKeyset ks = load_keyset(args.keyset);
    sepris::metrics::ReportOptions options;
    options.identity_codec = args.identity_codec;
    const sepris::metrics::SecurityReport report =
        sepris::metrics::security_report(plain, ks, options);
    std::cout << sepris::metrics::report_to_table(report);
    if (!args.json_out.empty()) {
        write_file(args.json_out, sepris::metrics::report_to_json(report));
    }
    return sepris::metrics::report_passes(report) ? kOk : kCheckFailed;
}

// ---- sim -----------------------------------------------------------------------

struct SimRunArgs {
    std::string scenario;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

int cmd_sim_run(const SimRunArgs& args) {
    sepris::network::ScenarioConfig config =
        sepris::network::scenario_from_json(read_text_file(args.scenario));
    if (args.seed_set) config.seed = args.seed;

    const sepris::network::ScenarioResult result = sepris::network::run_scenario(config);
    fs::create_directories(args.out_dir);
    const fs::path out(args.out_dir);
    write_file((out / "transcript.jsonl").string(),
               sepris::network::transcript_text(result.transcript));
    write_file((out / "chain.txt").string(),
               sepris::ledger::chain_to_text(result.net.nodes.front().chain));
    for (const auto& served : result.served) {
        write_file((out / ("stream-" + std::to_string(served.script_index) + ".bin")).string(),
                   sepris::BytesView(served.stream));
    }

    bool identical = true;
    for (const auto& node : result.net.nodes) {
        identical = identical && node.chain.blocks == result.net.nodes.front().chain.blocks;
    }
    std::cout << "blocks: " << result.net.nodes.front().chain.blocks.size()
              << "  served: " << result.served.size()
              << "  bus events: " << result.net.bus.events().size()
              << "  replicas identical: " << (identical ? "yes" : "no") << "\n"
              << "transcript: " << (out / "transcript.jsonl").string() << "\n"
              << "chain: " << (out / "chain.txt").string() << "\n";
    return kOk;
}

int cmd_sim_verify(const std::string& chain_path) {
    const sepris::ledger::Chain chain =
        sepris::ledger::chain_from_text(read_text_file(chain_path));
    const sepris::ledger::ChainValidity v = sepris::ledger::validate_chain(chain);
    if (v.valid) {
        std::cout << "chain valid: " << chain.blocks.size() << " blocks\n";
        return kOk;
    }
    std::cout << "chain invalid at block " << v.block_index << ": " << v.reason << "\n";
    return kCheckFailed;
}

int cmd_sim_audit_list(const std::string& chain_path, const std::string& scenario_path,
                       std::uint64_t seed, bool seed_set) {
    sepris::network::ScenarioConfig config =
        sepris::network::scenario_from_json(read_text_file(scenario_path));
    if (seed_set) config.seed = seed;

    sepris::ledger::Key32 body_key{};
    const sepris::Bytes bk = sepris::Drbg(config.seed).derive("bodykey").bytes(32);
    std::copy(bk.begin(), bk.end(), body_key.begin());
    sepris::ledger::Keystore keystore;
    keystore[sepris::ledger::body_key_id(body_key)] = body_key;

    const sepris::ledger::Chain chain =
        sepris::ledger::chain_from_text(read_text_file(chain_path));
    std::size_t count = 0;
    for (const auto& block : chain.blocks) {
        if (block.body_ciphertext.empty()) continue;  // genesis carries no body
        for (const auto& tx : sepris::ledger::decrypt_body(block, keystore)) {
            if (tx.kind != sepris::ledger::TxKind::AuditRecord) continue;
            const sepris::storage::AuditRecord record =
                sepris::storage::AuditRecord::from_json(sepris::to_string(tx.payload));
            std::cout << record.to_json() << "\n";
            ++count;
        }
    }
    std::cerr << count << " audit record(s)\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sepris: permissioned access control for stored surveillance video"};
    app.require_subcommand(1);

    KeygenArgs keygen;
    CLI::App* keygen_cmd = app.add_subcommand("keygen", "generate key material from a seed");
    keygen_cmd->add_option("--label", keygen.label, "key label")->required();
    keygen_cmd->add_option("--seed", keygen.seed, "deterministic seed")->required();
    keygen_cmd->add_option("--dir", keygen.dir, "key directory (default: $SEPRIS_HOME/keys)");
    keygen_cmd->add_option("--out", keygen.out, "output path (--dab mode)");
    keygen_cmd->add_flag("--force", keygen.force, "overwrite existing files");
    keygen_cmd->add_flag("--dab", keygen.dab, "write a frame-cipher keyset instead of a key pair");
    keygen_cmd->add_option("--quality", keygen.quality, "keyset quality factor (--dab mode)");

    IngestArgs ingest;
    CLI::App* ingest_cmd = app.add_subcommand("ingest", "pack image frames into a video container");
    ingest_cmd->add_option("--frames", ingest.frames_dir, "directory of .pgm/.ppm frames")
        ->required();
    ingest_cmd->add_option("--camera", ingest.camera, "camera id")->required();
    ingest_cmd->add_option("--date", ingest.date, "recording date YYYY-MM-DD")->required();
    ingest_cmd->add_option("--start", ingest.start, "start time HH:MM")->required();
    ingest_cmd->add_option("--fps", ingest.fps, "frames per second")->required();
    ingest_cmd->add_option("--out", ingest.out, "output .sprs path")->required();

    CodecArgs encode;
    CLI::App* encipher_cmd = app.add_subcommand("encipher", "encipher an image or video");
    encipher_cmd->add_option("--in", encode.input, "input .pgm/.ppm/.sprs path")->required();
    encipher_cmd->add_option("--keyset", encode.keyset, "keyset JSON path")->required();
    encipher_cmd->add_option("--out", encode.out, "output cipher stream path")->required();
    CLI::Option* enc_quality_opt =
        encipher_cmd->add_option("--quality", encode.quality, "override the keyset quality");

    CodecArgs decode;
    CLI::App* decipher_cmd = app.add_subcommand("decipher", "decipher a cipher stream");
    decipher_cmd->add_option("--in", decode.input, "input cipher stream path")->required();
    decipher_cmd->add_option("--keyset", decode.keyset, "keyset JSON path")->required();
    decipher_cmd->add_option("--out", decode.out, "output frame path prefix")->required();

    MetricsArgs metrics;
    CLI::App* metrics_cmd = app.add_subcommand("metrics", "statistical security report");
    metrics_cmd->add_option("--plain", metrics.plain, "plain image path")->required();
    metrics_cmd->add_option("--keyset", metrics.keyset, "keyset JSON path")->required();
    metrics_cmd->add_option("--json", metrics.json_out, "also write the report as JSON");
    metrics_cmd->add_flag("--identity-codec", metrics.identity_codec, "bypass the cipher (test hook)")
        ->group("");

    CLI::App* sim_cmd = app.add_subcommand("sim", "network simulation");
    sim_cmd->require_subcommand(1);

    SimRunArgs sim_run;
    CLI::App* sim_run_cmd = sim_cmd->add_subcommand("run", "run a scenario");
    sim_run_cmd->add_option("--scenario", sim_run.scenario, "scenario JSON path")->required();
    sim_run_cmd->add_option("--out-dir", sim_run.out_dir, "output directory")->required();
    CLI::Option* seed_opt =
        sim_run_cmd->add_option("--seed", sim_run.seed, "override the scenario seed");

    std::string verify_chain;
    CLI::App* sim_verify_cmd = sim_cmd->add_subcommand("verify", "validate a chain file");
    sim_verify_cmd->add_option("--chain", verify_chain, "chain file path")->required();

    std::string audit_chain;
    std::string audit_scenario;
    std::uint64_t audit_seed = 0;
    CLI::App* sim_audit_cmd = sim_cmd->add_subcommand("audit-list", "list on-chain audit records");
    sim_audit_cmd->add_option("--chain", audit_chain, "chain file path")->required();
    sim_audit_cmd->add_option("--scenario", audit_scenario, "scenario JSON path (body key seed)")
        ->required();
    CLI::Option* audit_seed_opt =
        sim_audit_cmd->add_option("--seed", audit_seed, "override the scenario seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (keygen_cmd->parsed()) return cmd_keygen(keygen);
        if (ingest_cmd->parsed()) return cmd_ingest(ingest);
        if (encipher_cmd->parsed()) {
            encode.quality_set = enc_quality_opt->count() > 0;
            return cmd_encipher(encode);
        }
        if (decipher_cmd->parsed()) return cmd_decipher(decode);
        if (metrics_cmd->parsed()) return cmd_metrics(metrics);
        if (sim_cmd->parsed()) {
            if (sim_run_cmd->parsed()) {
                sim_run.seed_set = seed_opt->count() > 0;
                return cmd_sim_run(sim_run);
            }
            if (sim_verify_cmd->parsed()) return cmd_sim_verify(verify_chain);
            if (sim_audit_cmd->parsed()) {
                return cmd_sim_audit_list(audit_chain, audit_scenario, audit_seed,
                                          audit_seed_opt->count() > 0);
            }
        }
    } catch (const sepris::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    std::cerr << "error: no subcommand\n";
    return kUsage;
}
