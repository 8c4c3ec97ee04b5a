#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "skewlab/entropy.hpp"
#include "skewlab/moran.hpp"
#include "skewlab/shadow.hpp"

namespace py = pybind11;
using namespace skewlab;

namespace {

std::pair<double, double> as_pair(const TorusPoint& p) { return {p.x1, p.x2}; }
TorusPoint as_point(std::pair<double, double> p) { return TorusPoint{p.first, p.second}.reduced(); }

Mat2i as_matrix(const std::array<long, 4>& e) { return Mat2i{e[0], e[1], e[2], e[3]}; }

void register_errors(py::module_& m) {
    static py::exception<Error> base(m, "SkewlabError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            base(( std::string(e.code()) + ": " + e.what()).c_str());
        }
    });
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "skewlab: skew products with hyperbolic fibers on the 2-torus";
    register_errors(m);

    py::class_<NumericsContext>(m, "NumericsContext")
        .def_static("double_mode", &NumericsContext::double_mode)
        .def_static("bigfloat", &NumericsContext::bigfloat, py::arg("bits"))
        .def_static("for_depth", &NumericsContext::for_depth, py::arg("depth"),
                    py::arg("lambda_u"), py::arg("guard_bits") = 64)
        .def_readonly("mantissa_bits", &NumericsContext::mantissa_bits)
        .def("certified_depth", &NumericsContext::certified_depth)
        .def_property_readonly("big", &NumericsContext::is_big);

    py::class_<HyperbolicMatrix>(m, "HyperbolicMatrix")
        .def_readonly("lambda_u", &HyperbolicMatrix::lambda_u)
        .def_readonly("lambda_s", &HyperbolicMatrix::lambda_s)
        .def_readonly("e_u", &HyperbolicMatrix::e_u)
        .def_readonly("e_s", &HyperbolicMatrix::e_s)
        .def("expansion_log", &HyperbolicMatrix::expansion_log);

    m.def(
        "eigen_split",
        [](std::array<long, 4> e) { return eigen_split(as_matrix(e)); },
        py::arg("matrix"), "Hyperbolic splitting of a 2x2 integer matrix (row major)");

    py::class_<SkewSystem>(m, "SkewSystem")
        .def("describe", &SkewSystem::describe)
        .def_property_readonly("expansion", &SkewSystem::expansion);

    m.def(
        "affine_system",
        [](std::array<long, 4> matrix, const std::string& alpha, const std::string& omega0,
           const std::string& offset) {
            auto drv = std::make_shared<CircleRotation>(
                AlphaSpec::parse(alpha), AlphaSpec{AlphaSpec::Kind::Decimal, omega0});
            OffsetKind off = offset == "omega" ? OffsetKind::OmegaX : OffsetKind::Zero;
            return make_affine_system(drv, as_matrix(matrix), off);
        },
        py::arg("matrix") = std::array<long, 4>{2, 1, 1, 1}, py::arg("alpha") = "golden",
        py::arg("omega0") = "0", py::arg("offset") = "zero",
        "Rotation-driven affine family F_omega x = Tx + h(omega)");

    m.def(
        "cocycle_system",
        [](std::vector<std::array<long, 4>> mats, const std::string& alpha, long base) {
            std::vector<Mat2i> ms;
            for (auto& e : mats) ms.push_back(as_matrix(e));
            auto drv = std::make_shared<SturmianDriver>(AlphaSpec::parse(alpha), base);
            return make_cocycle_system(drv, std::move(ms));
        },
        py::arg("matrices"), py::arg("alpha") = "golden", py::arg("base_index") = 0,
        "Sturmian-driven composition of positive integer matrices");

    m.def(
        "sturmian_word",
        [](const std::string& alpha, long start, long length) {
            SturmianDriver d(AlphaSpec::parse(alpha));
            auto w = d.word(start, length);
            return std::vector<int>(w.begin(), w.end());
        },
        py::arg("alpha") = "golden", py::arg("start") = 0, py::arg("length") = 64);

    m.def(
        "iterate",
        [](const SkewSystem& sys, std::pair<double, double> x, long n, long t0,
           const NumericsContext& ctx) { return as_pair(iterate(sys, t0, as_point(x), n, ctx)); },
        py::arg("system"), py::arg("x"), py::arg("n"), py::arg("t0") = 0,
        py::arg("ctx") = NumericsContext::double_mode());

    m.def(
        "bowen_distance",
        [](const SkewSystem& sys, std::pair<double, double> x, std::pair<double, double> y, long n,
           long t0, const NumericsContext& ctx) {
            return bowen_distance(sys, t0, n, as_point(x), as_point(y), ctx);
        },
        py::arg("system"), py::arg("x"), py::arg("y"), py::arg("n"), py::arg("t0") = 0,
        py::arg("ctx") = NumericsContext::double_mode());

    m.def(
        "birkhoff_trace",
        [](const SkewSystem& sys, std::pair<double, double> x, const std::string& observable,
           std::vector<long> checkpoints, long t0, const NumericsContext& ctx) {
            BirkhoffTrace tr = birkhoff_trace(sys, t0, as_point(x), Observable::parse(observable),
                                              checkpoints, ctx);
            return std::make_pair(tr.times, tr.averages);
        },
        py::arg("system"), py::arg("x"), py::arg("observable"), py::arg("checkpoints"),
        py::arg("t0") = 0, py::arg("ctx") = NumericsContext::double_mode());

    m.def(
        "gap_function",
        [](double eps, std::array<long, 4> matrix, double c_lat) {
            return gap_function(eps, eigen_split(as_matrix(matrix)), c_lat);
        },
        py::arg("eps"), py::arg("matrix") = std::array<long, 4>{2, 1, 1, 1},
        py::arg("lattice_constant") = 4.0);

    py::class_<Specification>(m, "Specification")
        .def(py::init([](long omega, std::vector<std::array<long, 2>> intervals,
                         std::vector<std::pair<double, double>> anchors) {
                 Specification s;
                 s.omega_t0 = omega;
                 s.intervals = std::move(intervals);
                 for (auto& a : anchors) s.anchors.push_back(as_point(a));
                 s.validate();
                 return s;
             }),
             py::arg("omega") = 0, py::arg("intervals") = std::vector<std::array<long, 2>>{},
             py::arg("anchors") = std::vector<std::pair<double, double>>{})
        .def("to_json", &Specification::to_json)
        .def_static("from_json", &Specification::from_json)
        .def("m_spaced", &Specification::m_spaced)
        .def_readonly("intervals", &Specification::intervals);

    m.def(
        "solve_specification",
        [](const SkewSystem& sys, const Specification& spec, double eps, long mantissa_bits,
           double c_lat) {
            NumericsContext ctx =
                mantissa_bits > 0
                    ? NumericsContext::bigfloat(mantissa_bits)
                    : NumericsContext::for_depth(spec.last_time() + 8, sys.expansion());
            SolveResult r = solve_specification(sys, spec, eps, ctx, c_lat);
            py::dict out;
            out["x"] = as_pair(r.x_double);
            out["x_decimal"] = std::make_pair(r.x.x1.to_decimal(), r.x.x2.to_decimal());
            out["max_deviation"] = r.max_deviation;
            out["block_deviation"] = r.block_deviation;
            out["glue_sigma"] = r.glue_sigma;
            out["glue_r"] = r.glue_r;
            out["heal_retries"] = r.heal_retries;
            return out;
        },
        py::arg("system"), py::arg("spec"), py::arg("eps"), py::arg("mantissa_bits") = 0,
        py::arg("lattice_constant") = 4.0);

    m.def(
        "verify_shadowing",
        [](const SkewSystem& sys, const Specification& spec, std::pair<double, double> x,
           double eps, long mantissa_bits) {
            NumericsContext ctx =
                mantissa_bits > 0
                    ? NumericsContext::bigfloat(mantissa_bits)
                    : NumericsContext::for_depth(spec.last_time() + 8, sys.expansion());
            VerifyResult v = verify_shadowing(sys, spec, as_point(x), eps, ctx);
            return std::make_tuple(v.ok, v.max_deviation, v.block_deviation);
        },
        py::arg("system"), py::arg("spec"), py::arg("x"), py::arg("eps"),
        py::arg("mantissa_bits") = 0);

    m.def(
        "max_separated",
        [](const SkewSystem& sys, int n, double eps, long grid, long t0) {
            long G = grid > 0 ? grid : auto_grid_cells(eps, n, sys.expansion());
            SeparatedSet s = max_separated(sys, t0, n, eps, G, NumericsContext::double_mode());
            std::vector<std::pair<double, double>> pts;
            for (const auto& p : s.points()) pts.push_back(as_pair(p));
            return pts;
        },
        py::arg("system"), py::arg("n"), py::arg("eps"), py::arg("grid") = 0, py::arg("t0") = 0);

    m.def(
        "deviation_count",
        [](const SkewSystem& sys, double alpha, double delta, int n, double eps,
           const std::string& observable, long grid) {
            long G = grid > 0 ? grid : auto_grid_cells(eps, n, sys.expansion());
            DeviationQuery q{alpha, delta, n, eps, 0};
            SeparatedSet s = deviation_count(sys, q, Observable::parse(observable), G,
                                             NumericsContext::double_mode());
            return s.cardinality();
        },
        py::arg("system"), py::arg("alpha"), py::arg("delta"), py::arg("n"), py::arg("eps"),
        py::arg("observable") = "cos_x1", py::arg("grid") = 0);

    m.def(
        "entropy_rate",
        [](std::vector<long> ns, std::vector<double> log_counts) {
            RateFit f = entropy_rate(ns, log_counts);
            return std::make_tuple(f.slope, f.stderr_slope, f.intercept);
        },
        py::arg("ns"), py::arg("log_counts"));

    m.def(
        "lyapunov_exponent",
        [](const SkewSystem& sys, long n, long t0) { return lyapunov_exponent(sys, t0, n); },
        py::arg("system"), py::arg("n"), py::arg("t0") = 0);

    m.def(
        "construct_irregular",
        [](const SkewSystem& sys, double alpha0, double alpha1, int levels, double eta,
           double tol_target, const std::string& observable, long mantissa_cap, long anchor_grid) {
            Observable phi = Observable::parse(observable);
            const HyperbolicMatrix& H = sys.affine_family().matrix;
            MoranOptions opts;
            opts.mantissa_cap = mantissa_cap;
            MoranSchedule sched =
                schedule_for_tolerance(H, phi, alpha0, alpha1, eta, levels, tol_target, opts);
            NumericsContext ctx = NumericsContext::bigfloat(sched.mantissa_required(H.lambda_u));
            IrregularCertificate c =
                construct_irregular(sys, phi, alpha0, alpha1, sched, ctx, anchor_grid);
            py::dict out;
            out["certified"] = c.certified;
            out["point"] = as_pair(c.point);
            out["times"] = c.times;
            out["averages"] = c.averages;
            out["targets"] = c.targets;
            out["deviations"] = c.deviations;
            out["nesting"] = c.nesting;
            std::vector<double> tols;
            for (auto& l : c.ledger) tols.push_back(l.tol);
            out["tolerances"] = tols;
            out["json"] = c.to_json();
            return out;
        },
        py::arg("system"), py::arg("alpha0") = 0.0, py::arg("alpha1") = 1.0,
        py::arg("levels") = 3, py::arg("eta") = 0.2, py::arg("tol_target") = 0.12,
        py::arg("observable") = "cos_x1", py::arg("mantissa_cap") = long(1) << 19,
        py::arg("anchor_grid") = 64);

    m.def(
        "construct_dense_variant",
        [](const SkewSystem& sys, std::pair<double, double> x, std::pair<double, double> target,
           double eps, int levels, const std::string& observable) {
            DenseVariantResult r = construct_dense_variant(
                sys, 0, as_point(x), as_point(target), eps, levels, Observable::parse(observable),
                nullptr);
            py::dict out;
            out["z"] = as_pair(r.z);
            out["target_distance"] = r.target_distance;
            out["average_difference"] = r.average_difference;
            out["ledger_bound"] = r.ledger_bound;
            out["certified"] = r.certified;
            return out;
        },
        py::arg("system"), py::arg("x"), py::arg("target"), py::arg("eps") = 0.05,
        py::arg("levels") = 3, py::arg("observable") = "cos_x1");

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "0.1.0";
#endif
}
