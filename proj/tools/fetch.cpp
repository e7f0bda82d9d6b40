#include "fetch.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <curl/curl.h>
#include <openssl/evp.h>
#include <zlib.h>

#include <json.hpp>

#include "convert.hpp"
#include "fairpsm/errors.hpp"
#include "fairpsm/report.hpp"

namespace fairpsm::tools {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

const std::vector<DatasetSource>& dataset_sources() {
    static const std::vector<DatasetSource> sources = {
        {"adult",
         {{"https://archive.ics.uci.edu/ml/machine-learning-databases/adult/adult.data",
           "adult.data"},
          {"https://archive.ics.uci.edu/ml/machine-learning-databases/adult/adult.test",
           "adult.test"}},
         48842,
         false},
        {"compas",
         {{"https://raw.githubusercontent.com/propublica/compas-analysis/master/"
           "compas-scores-two-years.csv",
           "compas-scores-two-years.csv"}},
         7214,
         false},
        {"german",
         {{"https://archive.ics.uci.edu/ml/machine-learning-databases/statlog/german/german.data",
           "german.data"}},
         1000,
         true},
        {"heart",
         {{"https://archive.ics.uci.edu/ml/machine-learning-databases/heart-disease/"
           "processed.cleveland.data",
           "processed.cleveland.data"}},
         303,
         true},
        {"bank",
         {{"https://archive.ics.uci.edu/ml/machine-learning-databases/00222/bank.zip",
           "bank.zip", true, "bank-full.csv"}},
         45211,
         false},
    };
    return sources;
}

namespace {

size_t curl_sink(void* data, size_t size, size_t nmemb, void* stream) {
    auto* out = static_cast<std::ofstream*>(stream);
    out->write(static_cast<const char*>(data), static_cast<std::streamsize>(size * nmemb));
    return size * nmemb;
}

void download(const std::string& url, const std::string& dest) {
    CURL* curl = curl_easy_init();
    if (!curl) throw ConfigError("libcurl initialization failed");
    std::ofstream out(dest, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + dest);
    curl_easy_setopt(curl, CURLOPT_URL, url.c_str());
    curl_easy_setopt(curl, CURLOPT_FOLLOWLOCATION, 1L);
    curl_easy_setopt(curl, CURLOPT_WRITEFUNCTION, curl_sink);
    curl_easy_setopt(curl, CURLOPT_WRITEDATA, &out);
    curl_easy_setopt(curl, CURLOPT_FAILONERROR, 1L);
    curl_easy_setopt(curl, CURLOPT_CONNECTTIMEOUT, 30L);
    const CURLcode rc = curl_easy_perform(curl);
    curl_easy_cleanup(curl);
    out.close();
    if (rc != CURLE_OK) {
        fs::remove(dest);
        throw ConfigError("download failed (" + std::string(curl_easy_strerror(rc)) + "): " + url);
    }
}

// Pulls one deflate- or store-compressed member out of a zip archive.
std::string unzip_member(const std::string& zip_path, const std::string& member) {
    std::ifstream in(zip_path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + zip_path);
    std::vector<char> blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    size_t pos = 0;
    while (pos + 30 <= blob.size()) {
        if (std::memcmp(blob.data() + pos, "PK\x03\x04", 4) != 0) break;
        auto u16 = [&](size_t at) {
            return static_cast<uint32_t>(static_cast<unsigned char>(blob[at])) |
                   (static_cast<uint32_t>(static_cast<unsigned char>(blob[at + 1])) << 8);
        };
        auto u32 = [&](size_t at) { return u16(at) | (u16(at + 2) << 16); };
        const uint32_t method = u16(pos + 8);
        const uint32_t compressed = u32(pos + 18);
        const uint32_t uncompressed = u32(pos + 22);
        const uint32_t name_len = u16(pos + 26);
        const uint32_t extra_len = u16(pos + 28);
        const std::string name(blob.data() + pos + 30, name_len);
        const size_t data_at = pos + 30 + name_len + extra_len;
        if (name == member) {
            if (data_at + compressed > blob.size()) throw InputError("zip member truncated");
            if (method == 0) return std::string(blob.data() + data_at, compressed);
            if (method != 8) throw InputError("zip member uses unsupported compression");
            std::string out(uncompressed, '\0');
            z_stream strm{};
            strm.next_in = reinterpret_cast<Bytef*>(blob.data() + data_at);
            strm.avail_in = compressed;
            strm.next_out = reinterpret_cast<Bytef*>(out.data());
            strm.avail_out = uncompressed;
            if (inflateInit2(&strm, -MAX_WBITS) != Z_OK) throw InputError("inflateInit failed");
            const int rc = inflate(&strm, Z_FINISH);
            inflateEnd(&strm);
            if (rc != Z_STREAM_END) throw InputError("zip member failed to inflate");
            return out;
        }
        pos = data_at + compressed;
    }
    throw InputError("zip archive has no member named " + member);
}

ordered_json load_checksums(const fs::path& path) {
    if (!fs::exists(path)) return ordered_json::object();
    std::ifstream in(path);
    ordered_json j;
    in >> j;
    return j;
}

} // namespace

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open for hashing: " + path);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in.good()) {
        in.read(buf, sizeof buf);
        EVP_DigestUpdate(ctx, buf, static_cast<size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) {
        char b[3];
        std::snprintf(b, sizeof b, "%02x", digest[i]);
        hex << b;
    }
    return hex.str();
}

void fetch_dataset(const std::string& name, const std::string& data_dir,
                   const std::vector<std::string>& from_files, bool offline) {
    const DatasetSource* source = nullptr;
    for (const auto& s : dataset_sources()) {
        if (s.name == name) source = &s;
    }
    if (!source) throw ConfigError("unknown dataset \"" + name + "\" (adult, compas, german, heart, bank)");

    const fs::path raw_dir = fs::path(data_dir) / "raw";
    fs::create_directories(raw_dir);
    const fs::path checksum_path = fs::path(data_dir) / "checksums.json";
    ordered_json checksums = load_checksums(checksum_path);

    // gather raw files: explicit local copies win, otherwise download
    std::vector<std::string> raw_paths;
    for (size_t i = 0; i < source->raw.size(); ++i) {
        const RawSource& raw = source->raw[i];
        fs::path local = raw_dir / raw.filename;
        if (i < from_files.size()) {
            fs::copy_file(from_files[i], local, fs::copy_options::overwrite_existing);
        } else if (!fs::exists(local)) {
            if (offline) {
                throw ConfigError("raw file " + local.string() +
                                  " missing and --offline given; expected from " + raw.url);
            }
            std::cerr << "fetching " << raw.url << "\n";
            download(raw.url, local.string());
        }
        if (raw.zip_member) {
            const std::string content = unzip_member(local.string(), raw.member_name);
            local = raw_dir / raw.member_name;
            std::ofstream out(local, std::ios::binary);
            out << content;
        }
        raw_paths.push_back(local.string());
    }

    // verify or record raw digests
    auto& entry = checksums[source->name];
    for (const auto& path : raw_paths) {
        const std::string digest = sha256_file(path);
        const std::string key = fs::path(path).filename().string();
        if (entry.contains("raw") && entry["raw"].contains(key)) {
            const std::string expected = entry["raw"][key].get<std::string>();
            if (expected != digest) {
                throw DataError("sha256 mismatch for " + key + ": expected " + expected +
                                ", found " + digest);
            }
        } else {
            entry["raw"][key] = digest;
        }
    }

    CsvTable converted;
    if (source->name == "adult") converted = convert_adult(raw_paths);
    else if (source->name == "german") converted = convert_german(raw_paths[0]);
    else if (source->name == "compas") converted = convert_compas(raw_paths[0]);
    else if (source->name == "heart") converted = convert_heart(raw_paths[0]);
    else converted = convert_bank(raw_paths[0]);

    if (source->expected_rows && converted.rows.size() != source->expected_rows) {
        throw DataError(source->name + ": converted row count " +
                        std::to_string(converted.rows.size()) + " does not match the published " +
                        std::to_string(source->expected_rows));
    }

    const fs::path out_dir = source->vendored ? fs::path(data_dir) : fs::path(data_dir) / "cache";
    fs::create_directories(out_dir);
    const fs::path out_path = out_dir / (source->name + ".csv");
    {
        std::ofstream out(out_path, std::ios::binary);
        write_csv(out, converted);
    }
    const std::string csv_digest = sha256_file(out_path.string());
    if (entry.contains("csv")) {
        if (entry["csv"].get<std::string>() != csv_digest) {
            throw DataError(source->name + ".csv digest changed: expected " +
                            entry["csv"].get<std::string>() + ", found " + csv_digest);
        }
    } else {
        entry["csv"] = csv_digest;
        entry["rows"] = converted.rows.size();
    }
    {
        std::ofstream out(checksum_path);
        out << checksums.dump(2) << "\n";
    }
    std::cout << source->name << ": " << converted.rows.size() << " rows -> " << out_path.string()
              << "\n  sha256 " << csv_digest << "\n";
}

} // namespace fairpsm::tools
