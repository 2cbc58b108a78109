#include "tsvf/report.hpp"

#include "tsvf/version.hpp"

#include <cmath>
#include <cstdio>

namespace tsvf {

namespace {

// Fixed 12-significant-digit formatting keeps reports byte-stable across
// runs; weak-value components below 1e-10 print as exact 0.
std::string fmt12(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

double snap_zero(double v) { return std::abs(v) < 1e-10 ? 0.0 : v; }

std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    return out;
}

class JsonWriter {
public:
    void begin_object() { separator(); out_ += '{'; fresh_ = true; }
    void end_object() { out_ += '}'; fresh_ = false; }
    void begin_array() { separator(); out_ += '['; fresh_ = true; }
    void end_array() { out_ += ']'; fresh_ = false; }

    void key(const std::string& k) {
        separator();
        out_ += '"';
        out_ += escape(k);
        out_ += "\":";
        fresh_ = true;
    }

    void string(const std::string& v) {
        separator();
        out_ += '"';
        out_ += escape(v);
        out_ += '"';
    }

    void number(double v) {
        separator();
        out_ += fmt12(v);
    }

    void number(std::uint64_t v) {
        separator();
        out_ += std::to_string(v);
    }

    void boolean(bool v) {
        separator();
        out_ += v ? "true" : "false";
    }

    std::string take() { return std::move(out_); }

private:
    void separator() {
        if (!fresh_ && !out_.empty()) {
            char last = out_.back();
            if (last != '{' && last != '[' && last != ':') out_ += ',';
        }
        fresh_ = false;
    }

    std::string out_;
    bool fresh_ = true;
};

} // namespace

std::string to_json(const Report& report) {
    JsonWriter w;
    w.begin_object();
    w.key("tool");
    w.string(kToolName);
    w.key("version");
    w.string(kVersion);
    w.key("scenario");
    w.string(report.scenario);
    w.key("postselection_probability");
    w.number(report.postselection_probability);

    w.key("weak_values");
    w.begin_array();
    for (const WeakRow& row : report.weak_values) {
        w.begin_object();
        w.key("rail");
        w.string(row.rail);
        w.key("slice");
        w.number(static_cast<std::uint64_t>(row.slice));
        w.key("re");
        w.number(snap_zero(row.re));
        w.key("im");
        w.number(snap_zero(row.im));
        w.end_object();
    }
    w.end_array();

    w.key("abl");
    w.begin_array();
    for (const AblRow& row : report.abl) {
        w.begin_object();
        w.key("rail");
        w.string(row.rail);
        w.key("slice");
        w.number(static_cast<std::uint64_t>(row.slice));
        w.key("probability");
        w.number(row.probability);
        w.end_object();
    }
    w.end_array();

    if (report.pointer) {
        const PointerSection& p = *report.pointer;
        w.key("pointer");
        w.begin_object();
        w.key("rail");
        w.string(p.rail);
        w.key("slice");
        w.number(static_cast<std::uint64_t>(p.slice));
        w.key("g");
        w.number(p.g);
        w.key("sigma");
        w.number(p.sigma);
        w.key("mean");
        w.number(p.mean);
        w.key("variance");
        w.number(p.variance);
        w.key("success_probability");
        w.number(p.success_probability);
        w.key("weak_value_re");
        w.number(snap_zero(p.weak_re));
        w.key("weak_value_im");
        w.number(snap_zero(p.weak_im));
        w.end_object();
    }

    if (report.montecarlo) {
        const MonteCarloSection& m = *report.montecarlo;
        w.key("montecarlo");
        w.begin_object();
        w.key("n");
        w.number(m.n);
        w.key("seed");
        w.number(m.seed);
        w.key("n_postselected");
        w.number(m.n_postselected);
        w.key("sample_mean");
        w.number(m.sample_mean);
        w.key("std_error");
        w.number(m.std_error);
        w.key("accepted");
        w.boolean(m.accepted);
        if (m.samples_path) {
            w.key("samples_out");
            w.string(*m.samples_path);
        }
        w.end_object();
    }

    w.end_object();
    std::string out = w.take();
    out += '\n';
    return out;
}

std::string samples_csv(const MonteCarloReport& mc) {
    std::string out = "trial,reading,postselected\n";
    char buf[64];
    for (const TrialRecord& rec : mc.trials) {
        if (rec.postselected) {
            std::snprintf(buf, sizeof(buf), "%llu,%.17g,1\n",
                          static_cast<unsigned long long>(rec.trial), rec.reading);
        } else {
            std::snprintf(buf, sizeof(buf), "%llu,,0\n",
                          static_cast<unsigned long long>(rec.trial));
        }
        out += buf;
    }
    return out;
}

} // namespace tsvf
