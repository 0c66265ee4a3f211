#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "stochfire/ensemble.hpp"
#include "stochfire/errors.hpp"
#include "stochfire/experiments.hpp"
#include "stochfire/forecasters.hpp"
#include "stochfire/grid.hpp"
#include "stochfire/metrics.hpp"
#include "stochfire/sim.hpp"
#include "stochfire/trace_io.hpp"

namespace py = pybind11;
using namespace stochfire;

namespace {

py::array_t<std::uint8_t> states_array(const GridFrame& f) {
    py::array_t<std::uint8_t> out({f.rows, f.cols});
    auto buf = out.mutable_unchecked<2>();
    for (int r = 0; r < f.rows; ++r) {
        for (int c = 0; c < f.cols; ++c) {
            buf(r, c) = static_cast<std::uint8_t>(f.state(r, c));
        }
    }
    return out;
}

py::array_t<std::uint8_t> mask_array(const MaskEnsemble& m, std::uint32_t sim, int t) {
    const auto mask = m.mask_at(sim, t);
    py::array_t<std::uint8_t> out({m.rows, m.cols});
    std::copy(mask.begin(), mask.end(), out.mutable_data());
    return out;
}

py::array_t<double> stat_map_array(const MicroStatMap& m) {
    py::array_t<double> out({m.horizon, m.rows, m.cols});
    std::copy(m.values.begin(), m.values.end(), out.mutable_data());
    return out;
}

py::array_t<double> forecast_array(const ForecastMap& f) {
    py::array_t<double> out({f.horizon, f.rows, f.cols});
    std::copy(f.values.begin(), f.values.end(), out.mutable_data());
    return out;
}

std::vector<std::uint8_t> as_mask(const py::array_t<std::uint8_t>& a) {
    const auto flat = py::array_t<std::uint8_t>::ensure(a);
    return {flat.data(), flat.data() + flat.size()};
}

std::vector<double> as_scores(const py::array_t<double>& a) {
    const auto flat = py::array_t<double>::ensure(a);
    return {flat.data(), flat.data() + flat.size()};
}

}  // namespace

PYBIND11_MODULE(_stochfire, m) {
    m.doc() = "Stochastic forest-fire CA: simulation, ensembles and verification";

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("rows", &SimConfig::rows)
        .def_readwrite("cols", &SimConfig::cols)
        .def_readwrite("density", &SimConfig::density)
        .def_readwrite("s_level", &SimConfig::s_level)
        .def_readwrite("q_threshold", &SimConfig::q_threshold)
        .def_readwrite("i_seed", &SimConfig::i_seed)
        .def_readwrite("q_die", &SimConfig::q_die)
        .def_readwrite("q_dead", &SimConfig::q_dead)
        .def_readwrite("alpha", &SimConfig::alpha)
        .def_readwrite("radius", &SimConfig::radius)
        .def_readwrite("max_steps", &SimConfig::max_steps)
        .def_readwrite("n_seeds", &SimConfig::n_seeds)
        .def_readwrite("seed_cells", &SimConfig::seed_cells)
        .def_readwrite("master_seed", &SimConfig::master_seed)
        .def_readwrite("shared_initial", &SimConfig::shared_initial)
        .def("p_ignite", &SimConfig::p_ignite)
        .def("validate", &SimConfig::validate)
        .def("__eq__",
             [](const SimConfig& a, const SimConfig& b) { return a == b; });

    py::class_<SimulationTrace>(m, "SimulationTrace")
        .def_readonly("config", &SimulationTrace::config)
        .def_readonly("sim_index", &SimulationTrace::sim_index)
        .def_readonly("terminated_at", &SimulationTrace::terminated_at)
        .def_property_readonly("n_frames",
                               [](const SimulationTrace& t) { return t.frames.size(); })
        .def("states",
             [](const SimulationTrace& t, int i) { return states_array(t.frames.at(i)); })
        .def("burnt_mask", [](const SimulationTrace& t, int i) {
            const auto mask = burnt_mask(t.frames.at(i));
            py::array_t<std::uint8_t> out({t.frames.at(i).rows, t.frames.at(i).cols});
            std::copy(mask.begin(), mask.end(), out.mutable_data());
            return out;
        });

    py::class_<EnsembleSpec>(m, "EnsembleSpec")
        .def(py::init<>())
        .def_readwrite("config", &EnsembleSpec::config)
        .def_readwrite("n_sims", &EnsembleSpec::n_sims)
        .def_readwrite("pad_to", &EnsembleSpec::pad_to)
        .def("horizon", &EnsembleSpec::horizon)
        .def("validate", &EnsembleSpec::validate);

    py::class_<MaskEnsemble>(m, "MaskEnsemble")
        .def_readonly("rows", &MaskEnsemble::rows)
        .def_readonly("cols", &MaskEnsemble::cols)
        .def_readonly("horizon", &MaskEnsemble::horizon)
        .def_readonly("n_sims", &MaskEnsemble::n_sims)
        .def_readonly("s_level", &MaskEnsemble::s_level)
        .def("burnt_count", &MaskEnsemble::burnt_count)
        .def("mask_at", &mask_array);

    py::class_<MacroSeries>(m, "MacroSeries")
        .def_readonly("mean_burnt", &MacroSeries::mean_burnt)
        .def_readonly("var_burnt", &MacroSeries::var_burnt)
        .def_readonly("mean_unburnt", &MacroSeries::mean_unburnt)
        .def_readonly("var_unburnt", &MacroSeries::var_unburnt)
        .def_property_readonly("horizon", &MacroSeries::horizon)
        .def_property_readonly("n_sims", &MacroSeries::n_sims);

    py::class_<ForecastMap>(m, "ForecastMap")
        .def_readonly("kind", &ForecastMap::kind)
        .def_readonly("horizon", &ForecastMap::horizon)
        .def_readonly("rows", &ForecastMap::rows)
        .def_readonly("cols", &ForecastMap::cols)
        .def("values", &forecast_array)
        .def("frame", [](const ForecastMap& f, int t) {
            py::array_t<double> out({f.rows, f.cols});
            const auto frame = f.frame(t);
            std::copy(frame.begin(), frame.end(), out.mutable_data());
            return out;
        });

    py::class_<PooledCells>(m, "PooledCells")
        .def_readonly("score", &PooledCells::score)
        .def_readonly("pos", &PooledCells::pos)
        .def_readonly("tot", &PooledCells::tot)
        .def("outcomes", &PooledCells::outcomes);

    py::class_<BrierDecomposition>(m, "BrierDecomposition")
        .def_readonly("reliability", &BrierDecomposition::reliability)
        .def_readonly("conditional_variance", &BrierDecomposition::conditional_variance);

    m.def("run_simulation", &run_simulation, py::arg("config"), py::arg("sim_index"));
    m.def("run_mask_ensemble", &run_mask_ensemble, py::arg("spec"),
          py::arg("workers") = 1,
          py::call_guard<py::gil_scoped_release>());
    m.def("micro_stat_map",
          [](const MaskEnsemble& e) { return stat_map_array(micro_stat_map(e)); });
    m.def("macro_series", &macro_series);
    m.def("steady_state_timestep", &steady_state_timestep, py::arg("series"),
          py::arg("grid_cells"), py::arg("rel_tol") = 0.001, py::arg("window") = 5);
    m.def("split_ensemble",
          [](const MaskEnsemble& e, double ratio) {
              EnsembleSplit s = split_ensemble(e, ratio);
              return py::make_tuple(std::move(s.train), std::move(s.eval));
          },
          py::arg("ensemble"), py::arg("train_ratio") = 0.5);

    m.def("oracle_forecast", &oracle_forecast, py::arg("training_half"));
    m.def("mismatched_oracle", &mismatched_oracle, py::arg("train_a"), py::arg("eval_b"));

    m.def("pool_at", &pool_at, py::arg("eval"), py::arg("forecast"), py::arg("t"));
    m.def("score_pooled", &score_pooled, py::arg("metric"), py::arg("cells"),
          py::arg("tau") = 0.5, py::arg("ece_bins") = 10);
    m.def("forecast_metrics", [] { return forecast_metrics(); });

    m.def("auc_pr", [](const py::array_t<double>& f, const py::array_t<std::uint8_t>& g) {
        return auc_pr(as_scores(f), as_mask(g));
    });
    m.def("auc_roc", [](const py::array_t<double>& f, const py::array_t<std::uint8_t>& g) {
        return auc_roc(as_scores(f), as_mask(g));
    });
    m.def("mse", [](const py::array_t<double>& f, const py::array_t<std::uint8_t>& g) {
        return mse(as_scores(f), as_mask(g));
    });
    m.def("ece",
          [](const py::array_t<double>& f, const py::array_t<std::uint8_t>& g, int m_) {
              return ece(as_scores(f), as_mask(g), m_);
          },
          py::arg("forecast"), py::arg("outcome"), py::arg("m") = 10);
    m.def("brier_decomposition",
          [](const py::array_t<double>& f, const py::array_t<std::uint8_t>& g) {
              return brier_decomposition(as_scores(f), as_mask(g));
          });
    m.def("dice", [](const py::array_t<std::uint8_t>& a, const py::array_t<std::uint8_t>& b) {
        return dice(as_mask(a), as_mask(b));
    });
    m.def("spearman", &spearman, py::arg("x"), py::arg("y"));

    m.def("write_trace", &write_trace, py::arg("path"), py::arg("trace"));
    m.def("read_trace", &read_trace, py::arg("path"));
    m.def("read_forecast", &read_forecast, py::arg("path"));

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<SeedingError>(m, "SeedingError", PyExc_RuntimeError);
    py::register_exception<ContaminationError>(m, "ContaminationError", PyExc_RuntimeError);
}
