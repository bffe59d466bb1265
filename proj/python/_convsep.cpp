#include "convsep/cosine_model.hpp"
#include "convsep/errors.hpp"
#include "convsep/kernel.hpp"
#include "convsep/nets.hpp"
#include "convsep/parity_model.hpp"
#include "convsep/theorems.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace convsep;

namespace {

ParityWeights parity_weights(const std::string& arch, const RealVector& w, int k) {
    return arch_from_string(arch) == Arch::WS ? ParityWeights::ws(w) : ParityWeights::fc_from_stacked(w, k);
}

// Round-trips through JSON so Python gets plain dicts.
py::object to_python(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_convsep, m) {
    m.doc() = "Kernels, objectives and checks for convolutional vs fully connected two-layer nets";

    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
    py::register_exception<EvaluationError>(m, "EvaluationError", PyExc_ArithmeticError);
    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

    m.def("v_sigma", &v_sigma, py::arg("u"), py::arg("v"));
    m.def("cos_gaussian_mean", &cos_gaussian_mean, py::arg("z"));
    m.def("cos_squared_diff_mean", &cos_squared_diff_mean, py::arg("w"), py::arg("v"));
    m.def("self_term", &self_term, py::arg("w"));
    m.def("cross_term", &cross_term, py::arg("u"), py::arg("w"));

    m.def(
        "cosine_objective",
        [](const std::string& arch, const RealVector& w, const RealVector& u0, int k) {
            return cosine_objective({arch_from_string(arch), w}, CosineParams::make(k, u0));
        },
        py::arg("arch"), py::arg("w"), py::arg("u0"), py::arg("k"));
    m.def(
        "cosine_gradient",
        [](const std::string& arch, const RealVector& w, const RealVector& u0, int k) {
            return cosine_gradient({arch_from_string(arch), w}, CosineParams::make(k, u0));
        },
        py::arg("arch"), py::arg("w"), py::arg("u0"), py::arg("k"));
    m.def(
        "parity_objective",
        [](const std::string& arch, const RealVector& w, const RealVector& u0, int k, const std::string& mode) {
            return parity_objective(parity_weights(arch, w, k), ParityParams::make(k, u0),
                                    parity_mode_from_string(mode));
        },
        py::arg("arch"), py::arg("w"), py::arg("u0"), py::arg("k"), py::arg("mode") = "k_only");
    m.def(
        "parity_gradient",
        [](const std::string& arch, const RealVector& w, const RealVector& u0, int k, const std::string& mode) {
            const ParityParams p = ParityParams::make(k, u0);
            const ParityMode pm = parity_mode_from_string(mode);
            if (arch_from_string(arch) == Arch::WS) return ws_gradient(w, p, pm);
            return parity_gradient(ParityWeights::fc_from_stacked(w, k), p, pm).stacked_gradient();
        },
        py::arg("arch"), py::arg("w"), py::arg("u0"), py::arg("k"), py::arg("mode") = "k_only");

    m.def(
        "nondegeneracy_floor",
        [](int k) {
            const NonDegeneracy f = nondegeneracy_floor(k);
            py::dict out;
            out["threshold"] = f.threshold;
            out["kernel_value"] = f.kernel_value;
            out["second_moment"] = f.verified_second_moment;
            return out;
        },
        py::arg("k"));

    m.def(
        "sgd_train",
        [](const std::string& arch, const std::string& gmode, const std::string& head, int k, int d, double eta,
           int batch, int iters, std::uint64_t seed) {
            SgdConfig cfg;
            cfg.arch = arch_from_string(arch);
            cfg.gmode = gmode_from_string(gmode);
            cfg.head = head_from_string(head);
            cfg.k = k;
            cfg.d = d;
            cfg.eta = eta;
            cfg.batch = batch;
            cfg.iters = iters;
            cfg.seed = seed;
            TrainResult r;
            {
                py::gil_scoped_release release;
                r = sgd_train(cfg);
            }
            py::dict out;
            out["loss_curve"] = r.loss_curve;
            out["initial_loss"] = r.initial_loss;
            out["final_loss"] = r.final_loss;
            return out;
        },
        py::arg("arch") = "ws", py::arg("gmode") = "both", py::arg("head") = "known", py::arg("k") = 10,
        py::arg("d") = 75, py::arg("eta") = 0.5, py::arg("batch") = 128, py::arg("iters") = 3000,
        py::arg("seed") = 0);

    m.def("check_names", &check_names);
    m.def(
        "run_check",
        [](const std::string& name, std::uint64_t seed) {
            CheckReport r;
            {
                py::gil_scoped_release release;
                r = run_check(name, seed);
            }
            return to_python(r.to_json());
        },
        py::arg("name"), py::arg("seed") = 0);
}
