#include <algorithm>

#include <fmt/format.h>

#include "facerec/eval.hpp"

namespace facerec {

std::string format_accuracy(std::optional<double> accuracy) {
    return accuracy ? fmt::format("{:.2f}", *accuracy) : std::string("n/a");
}

namespace {

using Row = std::vector<std::string>;

std::string render_rows(const Row& header, const std::vector<Row>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const Row& r : rows) width[c] = std::max(width[c], r[c].size());
    }
    auto line = [&](const Row& r) {
        std::string out;
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (c > 0) out += "  ";
            // First column left-aligned, numbers right-aligned.
            out += c == 0 ? fmt::format("{:<{}}", r[c], width[c]) : fmt::format("{:>{}}", r[c], width[c]);
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        return out + "\n";
    };
    std::string out = line(header);
    std::size_t total = 0;
    for (std::size_t w : width) total += w;
    out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
    for (const Row& r : rows) out += line(r);
    return out;
}

std::string render_csv_rows(const Row& header, const std::vector<Row>& rows) {
    auto join = [](const Row& r) {
        std::string out;
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (c > 0) out += ',';
            out += r[c];
        }
        return out + "\n";
    };
    std::string out = join(header);
    for (const Row& r : rows) out += join(r);
    return out;
}

std::vector<Row> rows_of(std::span<const DetectionReport> reports) {
    std::vector<Row> rows;
    for (const auto& r : reports)
        rows.push_back({r.id, std::to_string(r.framesWithFaces), std::to_string(r.detections), std::to_string(r.correct),
                        std::to_string(r.incorrect), format_accuracy(r.accuracy())});
    return rows;
}

std::vector<Row> rows_of(std::span<const RecognitionReport> reports) {
    std::vector<Row> rows;
    for (const auto& r : reports)
        rows.push_back({r.id, std::to_string(r.experiments), std::to_string(r.correct), std::to_string(r.incorrect),
                        format_accuracy(r.accuracy())});
    return rows;
}

// CSV ids are quoted only when they would break the row.
Row csv_safe(Row r) {
    if (r[0].find_first_of(",\"\n") != std::string::npos) {
        std::string q = "\"";
        for (char ch : r[0]) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        r[0] = q + "\"";
    }
    return r;
}

}  // namespace

std::string render_table(std::span<const DetectionReport> reports) {
    return render_rows({"Id", "Frames with Faces", "Detections", "Correct", "Incorrect", "Accuracy (%)"},
                       rows_of(reports));
}

std::string render_table(std::span<const RecognitionReport> reports) {
    return render_rows({"Id", "Experiments", "Correct", "Incorrect", "Accuracy (%)"}, rows_of(reports));
}

std::string render_csv(std::span<const DetectionReport> reports) {
    std::vector<Row> rows;
    for (auto& r : rows_of(reports)) rows.push_back(csv_safe(std::move(r)));
    return render_csv_rows({"id", "framesWithFaces", "detections", "correct", "incorrect", "accuracy"}, rows);
}

std::string render_csv(std::span<const RecognitionReport> reports) {
    std::vector<Row> rows;
    for (auto& r : rows_of(reports)) rows.push_back(csv_safe(std::move(r)));
    return render_csv_rows({"id", "experiments", "correct", "incorrect", "accuracy"}, rows);
}

}  // namespace facerec
