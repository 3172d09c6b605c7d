#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "gssl/crf.hpp"
#include "gssl/errors.hpp"

namespace gssl {

namespace {

constexpr std::string_view kMagic = "gssl-crf-model";
constexpr int kFormatVersion = 1;

std::string format_weight(double w) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", w);
  return buf;
}

std::vector<std::string> split_spaces(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string word;
  while (in >> word) out.push_back(word);
  return out;
}

}  // namespace

void write_model(std::ostream& out, const CrfModel& model) {
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "templates";
  for (const auto& t : model.templates) out << ' ' << t.code();
  out << '\n';
  out << "labels";
  for (const auto& name : model.alphabet.names()) out << ' ' << name;
  out << '\n';
  out << "attributes " << model.attributes.size() << '\n';
  for (std::size_t id = 0; id < model.num_weights(); ++id) {
    out << model.feature_string(id) << '\t' << format_weight(model.weights[id]) << '\n';
  }
}

CrfModel read_model(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> std::vector<std::string> {
    if (!std::getline(in, line)) throw ParseError(source, line_no + 1, "unexpected end of model file");
    ++line_no;
    return split_spaces(line);
  };

  auto header = next();
  if (header.size() != 2 || header[0] != kMagic) throw ParseError(source, line_no, "not a model file");
  if (header[1] != std::to_string(kFormatVersion)) {
    throw ParseError(source, line_no, "unsupported model version " + header[1]);
  }

  auto tmpl = next();
  if (tmpl.empty() || tmpl[0] != "templates") throw ParseError(source, line_no, "expected templates");
  std::vector<FeatureTemplate> templates;
  for (std::size_t i = 1; i < tmpl.size(); ++i) templates.push_back(FeatureTemplate::parse(tmpl[i]));

  auto labels = next();
  if (labels.size() < 2 || labels[0] != "labels" || labels[1] != kNullLabelName) {
    throw ParseError(source, line_no, "expected label list starting with O");
  }
  LabelAlphabet alphabet;
  for (std::size_t i = 2; i < labels.size(); ++i) alphabet.add(labels[i]);

  auto attrs = next();
  if (attrs.size() != 2 || attrs[0] != "attributes") throw ParseError(source, line_no, "expected attribute count");
  const std::size_t n_attrs = std::stoull(attrs[1]);

  CrfModel model;
  try {
    model = make_model(std::move(alphabet), std::move(templates));
  } catch (const ConfigError& e) {
    throw ParseError(source, line_no, e.what());
  }
  const std::size_t L = model.num_labels();
  const std::size_t total = L * L + n_attrs * L;
  model.weights.assign(L * L, 0.0);
  for (std::size_t id = 0; id < total; ++id) {
    if (!std::getline(in, line)) throw ParseError(source, line_no + 1, "truncated weight list");
    ++line_no;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw ParseError(source, line_no, "expected feature<TAB>weight");
    const auto fields = split_spaces(line.substr(0, tab));
    double w = 0.0;
    const char* begin = line.data() + tab + 1;
    const char* end = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(begin, end, w);
    if (ec != std::errc() || ptr != end) throw ParseError(source, line_no, "bad weight");

    if (id < L * L) {
      if (fields.size() != 3 || fields[0] != "trans" ||
          model.alphabet.find(fields[1]) != static_cast<LabelId>(id / L) ||
          model.alphabet.find(fields[2]) != static_cast<LabelId>(id % L)) {
        throw ParseError(source, line_no, "transition weights out of order");
      }
    } else {
      const std::size_t rest = id - L * L;
      if (fields.size() != 3 || fields[0] != "state" ||
          model.alphabet.find(fields[2]) != static_cast<LabelId>(rest % L)) {
        throw ParseError(source, line_no, "state weights out of order");
      }
      if (rest % L == 0) {
        if (model.add_attribute(fields[1]) != static_cast<int>(rest / L)) {
          throw ParseError(source, line_no, "duplicate attribute " + fields[1]);
        }
      } else if (model.attributes.name(static_cast<int>(rest / L)) != fields[1]) {
        throw ParseError(source, line_no, "state weights out of order");
      }
    }
    model.weights[id] = w;
  }
  return model;
}

void save_model(const std::filesystem::path& path, const CrfModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file " + path.string());
  write_model(out, model);
  if (!out) throw DataError("error writing " + path.string());
}

CrfModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file " + path.string());
  return read_model(in, path.string());
}

}  // namespace gssl
