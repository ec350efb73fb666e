#include "opinion/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "opinion/utf8.h"

namespace opinion {

namespace {

const std::array<std::vector<std::string>, 3> kLexicon = {{
    {"excelente", "dedicado", "amable", "paciente", "puntual", "brillante", "organizado",
     "motivador", "respetuoso", "genial", "dinámico", "atento", "didáctico", "inspirador",
     "admirable", "ameno", "preparado", "comprometido", "cordial", "entusiasta", "espléndido",
     "maravilloso", "agradable", "recomendable", "accesible", "competente", "sobresaliente",
     "interesante", "fantástico", "generoso"},
    {"regular", "normal", "aceptable", "promedio", "mesurado", "estándar", "suficiente", "corriente",
     "moderado", "habitual", "intermedio", "tradicional", "típico", "ordinario", "mediano",
     "sencillo", "formal", "teórico", "básico", "general", "convencional", "neutral", "variable",
     "rutinario", "previsible", "discreto", "pasable", "tolerable", "equilibrado", "simple"},
    {"pésimo", "confuso", "aburrido", "grosero", "impuntual", "desorganizado", "injusto",
     "arrogante", "irrespetuoso", "terrible", "desmotivado", "deficiente", "lento", "mediocre",
     "autoritario", "desinteresado", "malo", "incoherente", "distante", "monótono", "negligente",
     "caótico", "incompetente", "tedioso", "desagradable", "irresponsable", "frustrante",
     "agresivo", "despectivo", "ineficaz"},
}};

const std::array<std::vector<std::string>, 5> kTopics = {{
    {"explicación", "ejemplos", "metodología", "ejercicios", "pizarra", "diapositivas", "lecturas",
     "talleres", "dudas", "temas", "contenidos", "material", "guías", "conceptos", "tutorías",
     "laboratorio"},
    {"exámenes", "notas", "parciales", "calificaciones", "quices", "trabajos", "entregas",
     "rúbrica", "criterios", "retroalimentación", "porcentajes", "corrección", "preguntas",
     "evaluaciones", "sustentación", "puntaje"},
    {"horario", "asistencia", "retrasos", "tiempo", "minutos", "llegada", "cronograma",
     "calendario", "semanas", "faltas", "jornada", "reprogramación", "madrugada", "sesiones",
     "plazo", "agenda"},
    {"trato", "respeto", "estudiantes", "comunicación", "actitud", "confianza", "ambiente",
     "relación", "escucha", "apoyo", "compañeros", "grupo", "diálogo", "cercanía", "carácter",
     "paciencia"},
    {"empresa", "industria", "proyectos", "aplicaciones", "experiencia", "carrera", "mercado",
     "casos", "herramientas", "software", "programación", "estadística", "finanzas",
     "investigación", "práctica", "profesión"},
}};

const std::vector<std::string> kFillers = {
    "el",      "la",       "es",      "muy",    "de",       "que",       "en",
    "con",     "los",      "las",     "y",      "su",       "siempre",   "profesor",
    "profesora", "clase",  "curso",   "materia", "semestre", "docente", "asignatura"};

const std::string& pick(const std::vector<std::string>& v, Rng& rng) { return v[rng.below(v.size())]; }

std::string capitalize(const std::string& s) {
  std::u32string u = utf8::decode(s);
  if (!u.empty() && u[0] >= U'a' && u[0] <= U'z') u[0] = u[0] - U'a' + U'A';
  return utf8::encode(u);
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

const std::vector<std::string>& synth_lexicon(Polarity p) { return kLexicon[static_cast<int>(p)]; }
const std::vector<std::string>& synth_topic_words(int topic) { return kTopics.at(topic); }

nlohmann::json SynthConfig::to_json() const {
  return {{"n_comments", n_comments},
          {"n_courses", n_courses},
          {"seed", seed},
          {"overlap", overlap},
          {"topics", topics},
          {"class_prior", class_prior},
          {"score_correlation", score_correlation},
          {"short_fraction", short_fraction}};
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
  SynthConfig c;
  c.n_comments = j.value("n_comments", c.n_comments);
  c.n_courses = j.value("n_courses", c.n_courses);
  c.seed = j.value("seed", c.seed);
  c.overlap = j.value("overlap", c.overlap);
  c.topics = j.value("topics", c.topics);
  c.class_prior = j.value("class_prior", c.class_prior);
  c.score_correlation = j.value("score_correlation", c.score_correlation);
  c.short_fraction = j.value("short_fraction", c.short_fraction);
  return c;
}

SynthCorpus generate_synth(const SynthConfig& cfg) {
  if (cfg.n_comments < 30) throw Error("invalid_argument", "synth needs at least 30 comments");
  if (cfg.n_courses < 1) throw Error("invalid_argument", "synth needs at least one course");
  if (!(cfg.overlap >= 0.0 && cfg.overlap <= 1.0)) {
    throw Error("invalid_argument", "overlap must lie in [0, 1]");
  }
  if (cfg.topics < 1 || cfg.topics > static_cast<int>(kTopics.size())) {
    throw Error("invalid_argument", "synth supports 1 to 5 topics");
  }
  if (!(cfg.score_correlation >= -1.0 && cfg.score_correlation <= 1.0)) {
    throw Error("invalid_argument", "score correlation must lie in [-1, 1]");
  }
  for (double p : cfg.class_prior) {
    if (!(p > 0.0)) throw Error("invalid_argument", "class prior entries must be positive");
  }

  Rng rng(derive_seed(cfg.seed, "synth"));
  SynthCorpus out;

  std::vector<double> quality(cfg.n_courses);
  for (std::size_t i = 0; i < cfg.n_courses; ++i) {
    CourseRecord c;
    char code[16];
    std::snprintf(code, sizeof code, "S%03zu", i % 1000);
    c.subject_code = code;
    c.period = std::to_string(2016 + (i / 1000) % 8) + "-" + std::to_string(1 + i % 2);
    quality[i] = rng.uniform();
    const double zq = (quality[i] - 0.5) * std::sqrt(12.0);
    const double r = cfg.score_correlation;
    const double z = r * zq + std::sqrt(1.0 - r * r) * rng.normal();
    const double eval = std::clamp(round2(4.2 + 0.45 * z), 1.0, 5.0);
    c.score_evaluation = eval;
    c.score_pedagogy = std::clamp(round2(eval + 0.1 * rng.normal()), 1.0, 5.0);
    c.score_interpersonal = std::clamp(round2(eval + 0.1 * rng.normal()), 1.0, 5.0);
    c.education_level =
        rng.bernoulli(0.8) ? EducationLevel::undergraduate : EducationLevel::postgraduate;
    out.courses.push_back(std::move(c));
  }

  std::vector<int64_t> per_course(cfg.n_courses, 0);
  for (std::size_t i = 0; i < cfg.n_comments; ++i) {
    const std::size_t course = rng.below(cfg.n_courses);
    ++per_course[course];
    const double tilt = 2.0 * (quality[course] - 0.5);
    std::array<double, 3> w = {cfg.class_prior[0] * std::exp(1.2 * tilt), cfg.class_prior[1],
                               cfg.class_prior[2] * std::exp(-1.2 * tilt)};
    const auto cls = static_cast<Polarity>(rng.categorical(w));
    const int topic = static_cast<int>(rng.below(cfg.topics));

    std::vector<std::string> words;
    auto polarity_word = [&]() {
      int from = static_cast<int>(cls);
      if (rng.bernoulli(cfg.overlap)) from = (from + 1 + static_cast<int>(rng.below(2))) % 3;
      words.push_back(pick(kLexicon[from], rng));
    };
    if (rng.bernoulli(cfg.short_fraction)) {
      polarity_word();
      if (rng.bernoulli(0.5)) words.push_back(pick(kFillers, rng));
      words.push_back(pick(kFillers, rng));
    } else {
      const auto n_pol = rng.between(3, 5);
      for (int64_t k = 0; k < n_pol; ++k) polarity_word();
      const auto n_topic = rng.between(2, 5);
      for (int64_t k = 0; k < n_topic; ++k) {
        int t = topic;
        if (cfg.topics > 1 && rng.bernoulli(0.1)) {
          t = (topic + 1 + static_cast<int>(rng.below(cfg.topics - 1))) % cfg.topics;
        }
        words.push_back(pick(kTopics[t], rng));
      }
      const auto n_fill = rng.between(2, 5);
      for (int64_t k = 0; k < n_fill; ++k) words.push_back(pick(kFillers, rng));
      rng.shuffle(words);
    }
    std::string text;
    for (const auto& w2 : words) text += (text.empty() ? "" : " ") + w2;
    text = capitalize(text) + ".";

    char id[16];
    std::snprintf(id, sizeof id, "c%05zu", i + 1);
    const auto& crs = out.courses[course];
    out.comments.push_back({id, crs.subject_code, crs.period, text, cls});
    out.labels.push_back({id, cls});
    out.topic_of.push_back(topic);
  }

  for (std::size_t i = 0; i < cfg.n_courses; ++i) {
    const double rr = rng.uniform(0.3, 0.9);
    out.courses[i].num_students =
        std::max<int64_t>(1, static_cast<int64_t>(std::ceil(per_course[i] / rr)));
  }
  return out;
}

void save_synth(const std::filesystem::path& dir, const SynthCorpus& corpus) {
  save_comments(dir / "comments.csv", corpus.comments);
  save_courses(dir / "courses.csv", corpus.courses);
  save_labels(dir / "labels.csv", corpus.labels);
}

}  // namespace opinion
