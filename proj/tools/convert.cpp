#include "convert.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "fairpsm/errors.hpp"

namespace fairpsm::tools {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_on(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(trim(cell));
            cell.clear();
        } else {
            cell.push_back(ch);
        }
    }
    out.push_back(trim(cell));
    return out;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open raw file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

} // namespace

CsvTable convert_adult(const std::vector<std::string>& raw_paths) {
    CsvTable out;
    out.header = {"age",          "workclass",    "fnlwgt",       "education",
                  "education-num", "marital-status", "occupation", "relationship",
                  "race",         "sex",          "capital-gain", "capital-loss",
                  "hours-per-week", "native-country", "income"};
    for (const auto& path : raw_paths) {
        for (const auto& line : read_lines(path)) {
            const std::string t = trim(line);
            if (t.empty() || t[0] == '|') continue; // adult.test leads with a comment
            auto fields = split_on(t, ',');
            if (fields.size() != out.header.size()) {
                throw InputError("adult raw line has " + std::to_string(fields.size()) +
                                 " fields: " + t.substr(0, 60));
            }
            std::string& income = fields.back();
            if (!income.empty() && income.back() == '.') income.pop_back(); // adult.test quirk
            out.rows.push_back(std::move(fields));
        }
    }
    return out;
}

CsvTable convert_german(const std::string& raw_path) {
    CsvTable out;
    out.header = {"checking_status", "duration",       "credit_history", "purpose",
                  "credit_amount",   "savings",        "employment",     "installment_rate",
                  "sex",             "other_debtors",  "residence_since", "property",
                  "age",             "other_installment", "housing",     "existing_credits",
                  "job",             "num_dependents", "telephone",      "foreign_worker",
                  "credit"};
    for (const auto& line : read_lines(raw_path)) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        std::istringstream fields(t);
        std::vector<std::string> row;
        std::string field;
        while (fields >> field) row.push_back(field);
        if (row.size() != 21) {
            throw InputError("german raw line has " + std::to_string(row.size()) + " fields");
        }
        // attribute 9: A91/A93/A94 male, A92/A95 female
        const std::string& code = row[8];
        if (code == "A91" || code == "A93" || code == "A94") row[8] = "male";
        else if (code == "A92" || code == "A95") row[8] = "female";
        else throw InputError("german: unknown personal-status code " + code);
        row[20] = row[20] == "1" ? "good" : "bad";
        out.rows.push_back(std::move(row));
    }
    return out;
}

CsvTable convert_compas(const std::string& raw_path) {
    return read_csv(raw_path);
}

CsvTable convert_heart(const std::string& raw_path) {
    CsvTable out;
    out.header = {"age",  "sex",     "cp",    "trestbps", "chol",    "fbs",  "restecg",
                  "thalach", "exang", "oldpeak", "slope",  "ca",     "thal", "target"};
    static const std::map<std::string, std::string> cp = {{"1", "typical_angina"},
                                                          {"2", "atypical_angina"},
                                                          {"3", "non_anginal"},
                                                          {"4", "asymptomatic"}};
    static const std::map<std::string, std::string> ecg = {
        {"0", "normal"}, {"1", "st_t_abnormal"}, {"2", "lv_hypertrophy"}};
    static const std::map<std::string, std::string> slope = {
        {"1", "upsloping"}, {"2", "flat"}, {"3", "downsloping"}};
    static const std::map<std::string, std::string> thal = {
        {"3", "normal"}, {"6", "fixed_defect"}, {"7", "reversable_defect"}};

    auto integral = [](const std::string& v) -> std::string {
        // cleveland writes categorical codes as 1.0/2.0/...
        const double x = std::stod(v);
        return std::to_string(static_cast<long long>(x));
    };
    auto decode = [&](const std::map<std::string, std::string>& table, const std::string& v,
                      const char* what) -> std::string {
        if (v == "?") return "?";
        const auto it = table.find(integral(v));
        if (it == table.end()) throw InputError(std::string("heart: unknown ") + what + " code " + v);
        return it->second;
    };
    for (const auto& line : read_lines(raw_path)) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        auto f = split_on(t, ',');
        if (f.size() != 14) throw InputError("heart raw line has " + std::to_string(f.size()) + " fields");
        std::vector<std::string> row(14);
        row[0] = f[0];
        row[1] = f[1] == "?" ? "?" : (integral(f[1]) == "1" ? "male" : "female");
        row[2] = decode(cp, f[2], "chest-pain");
        row[3] = f[3];
        row[4] = f[4];
        row[5] = f[5] == "?" ? "?" : integral(f[5]);
        row[6] = decode(ecg, f[6], "rest-ecg");
        row[7] = f[7];
        row[8] = f[8] == "?" ? "?" : integral(f[8]);
        row[9] = f[9];
        row[10] = decode(slope, f[10], "slope");
        row[11] = f[11];
        row[12] = decode(thal, f[12], "thal");
        // num 0 = no disease, 1-4 = disease present
        row[13] = f[13] == "?" ? "?" : (integral(f[13]) == "0" ? "0" : "1");
        out.rows.push_back(std::move(row));
    }
    return out;
}

CsvTable convert_bank(const std::string& raw_path) {
    CsvTable raw = read_csv(raw_path, ';');
    for (auto& h : raw.header) h = trim(h);
    return raw;
}

} // namespace fairpsm::tools
