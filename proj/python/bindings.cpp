// Python bindings for the numerical core.
#include "twf/fock_twisted.hpp"
#include "twf/heisenberg.hpp"
#include "twf/hermite.hpp"
#include "twf/verify.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace twf;

PYBIND11_MODULE(_twf, m) {
    m.doc() = "Twisted Fock space numerics";

    static py::exception<NumericalError> numerical(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const NumericalError& e) {
            py::set_error(numerical, e.what());
        } catch (const DomainError& e) {
            py::set_error(PyExc_ValueError, e.what());
        }
    });

    py::class_<HermiteBasisSpec>(m, "HermiteBasisSpec")
        .def(py::init<int, double, int>(), py::arg("n"), py::arg("lambda_"), py::arg("cutoff"))
        .def_readonly("n", &HermiteBasisSpec::n)
        .def_readonly("lambda_", &HermiteBasisSpec::lambda)
        .def_readonly("cutoff", &HermiteBasisSpec::cutoff)
        .def("size", &HermiteBasisSpec::size);

    m.def("hermite_function", &hermite_function, py::arg("k"), py::arg("x"));
    m.def("laguerre_polynomial", &laguerre_polynomial, py::arg("k"), py::arg("alpha"), py::arg("x"));
    m.def("heat_kernel", &heat_kernel, py::arg("t"), py::arg("lambda_"), py::arg("y"), py::arg("v"));
    m.def("heat_semigroup", &heat_semigroup, py::arg("t"), py::arg("spec"));

    py::class_<TwistedElement>(m, "TwistedElement")
        .def(py::init([](const CVector& a, const CVector& b, double t) {
                 TwistedElement g{a, b, t};
                 g.validate();
                 return g;
             }),
             py::arg("a"), py::arg("b"), py::arg("t") = 0.0)
        .def_readonly("a", &TwistedElement::a)
        .def_readonly("b", &TwistedElement::b)
        .def_readonly("t", &TwistedElement::t);
    m.def("twisted_mul", &twisted_mul, py::arg("lambda_"), py::arg("g"), py::arg("h"));
    m.def("twisted_inverse", &twisted_inverse, py::arg("lambda_"), py::arg("g"));
    m.def(
        "schrodinger_matrix",
        [](double lambda, const CVector& z, const CVector& w, const HermiteBasisSpec& spec) {
            return schrodinger_matrix(lambda, z, w, spec);
        },
        py::arg("lambda_"), py::arg("z"), py::arg("w"), py::arg("spec"));

    py::class_<CalibrationConstants>(m, "CalibrationConstants")
        .def_readonly("c_lambda", &CalibrationConstants::c_lambda)
        .def_readonly("d_lambda", &CalibrationConstants::d_lambda)
        .def_readonly("weight_mass", &CalibrationConstants::weight_mass)
        .def_readonly("check_error", &CalibrationConstants::check_error);
    m.def("calibration", &calibration, py::arg("lambda_"), py::arg("n"), py::return_value_policy::copy);
    m.def("weight", &weight, py::arg("lambda_"), py::arg("z"), py::arg("w"));
    m.def("weight_shape", &weight_shape, py::arg("lambda_"), py::arg("z"), py::arg("w"));

    py::class_<TwistedFockElement>(m, "TwistedFockElement")
        .def_property_readonly("lambda_", &TwistedFockElement::lambda)
        .def_property_readonly("n", &TwistedFockElement::n)
        .def_property_readonly("cutoff", &TwistedFockElement::cutoff)
        .def_property_readonly("T", &TwistedFockElement::T)
        .def("__call__", &TwistedFockElement::operator(), py::arg("z"), py::arg("w"));
    m.def("gcal", &gcal, py::arg("T"), py::arg("lambda_"), py::arg("n"));
    m.def("gcal_adjoint", [](const TwistedFockElement& F) { return CMatrix(gcal_adjoint(F)); }, py::arg("F"));

    m.def("registered_suites", &registered_suites, py::return_value_policy::copy);
    m.def(
        "run_verify",
        [](std::vector<std::string> suites, std::vector<double> lambdas, unsigned seed, std::optional<double> tolerance) {
            RunConfig cfg;
            cfg.suites = suites.empty() ? registered_suites() : suites;
            if (!lambdas.empty()) cfg.lambdas = lambdas;
            cfg.seed = seed;
            cfg.tolerance = tolerance;
            cfg.validate();
            const VerificationReport report = run_verify(cfg);
            std::ostringstream os;
            write_ndjson(os, report, false);
            return py::make_tuple(report.exit_code(), os.str());
        },
        py::arg("suites") = std::vector<std::string>{}, py::arg("lambdas") = std::vector<double>{}, py::arg("seed") = 7u,
        py::arg("tolerance") = std::nullopt,
        "Runs the suites; returns (exit_code, ndjson report without timings).");
}
