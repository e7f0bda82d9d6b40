#pragma once

#include <string>
#include <vector>

namespace fairpsm::tools {

struct RawSource {
    std::string url;
    std::string filename; // local name under the raw cache
    bool zip_member = false;
    std::string member_name; // file to pull out of a zip archive
};

struct DatasetSource {
    std::string name;
    std::vector<RawSource> raw;
    size_t expected_rows = 0; // published row count, checked after conversion
    bool vendored = false;    // ships with the repository (small datasets)
};

const std::vector<DatasetSource>& dataset_sources();

// Download (or reuse --from-file copies), verify, convert, and write
// <data_dir>/<name>.csv for vendored sets or <data_dir>/cache/<name>.csv
// otherwise. SHA-256 digests of the raw files and the converted CSV are
// recorded in <data_dir>/checksums.json on first sight and verified on every
// later run.
void fetch_dataset(const std::string& name, const std::string& data_dir,
                   const std::vector<std::string>& from_files, bool offline);

std::string sha256_file(const std::string& path);

} // namespace fairpsm::tools
