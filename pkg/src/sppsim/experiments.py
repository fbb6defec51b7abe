"""Experiment driver: builds the figure suite from a :class:`RunConfig`."""

from __future__ import annotations

import json
import os
import threading
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dyndiff, geometry, interferogram as itf, io, materials, oam
from .config import RunConfig, validate
from .errors import ResolutionWarning
from .fields import Grid, ScalarField2D, Unit

OUTPUT_DIR_ENV = "SPPSIM_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "sppsim-out"


@dataclass
class RunResult:
    files: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)


class _Context:
    def __init__(self, cfg: RunConfig, output_dir: Path, jobs: int):
        self.cfg = cfg
        self.material = materials.get_material(cfg.material)
        self.beam = materials.BeamConfig(cfg.wavelength)
        self.d_lambda = materials.lambda_thickness(self.material, self.beam)
        self.grid = Grid.square(cfg.grid_n, cfg.grid_extent)
        det = {"nu": 100, "nv": 100, "noise_model": "none"}
        det.update(cfg.detector)
        det.setdefault("pixel_pitch", cfg.grid_extent / det["nu"])
        det["rng_seed"] = cfg.seed if cfg.seed is not None else 0
        self.detector = itf.DetectorSpec(**det)
        self.out = output_dir
        self.prefix = cfg.label or cfg.experiment
        self.jobs = jobs
        self.files: list[Path] = []
        self.conservation_error = 0.0
        self._lock = threading.Lock()

    def spp(self, spec: dict) -> geometry.SpiralPhasePlate:
        kw = {}
        for src, dst in (("diameter", "diameter"), ("base", "base_thickness"), ("center_x", "center_x"),
                         ("center_z", "center_z"), ("n_slices", "n_slices")):
            if src in spec:
                kw[dst] = spec[src]
        if "L" in spec:
            return geometry.SpiralPhasePlate.from_momentum(spec["L"], self.d_lambda, **kw)
        return geometry.SpiralPhasePlate(step_height_hs=spec["step_height"], **kw)

    def effective_L(self, spp) -> float:
        return materials.effective_momentum(spp.step_height_hs, self.d_lambda)

    def map(self, fn, items):
        if self.jobs > 1:
            with ThreadPoolExecutor(self.jobs) as ex:
                return list(ex.map(fn, items))
        return [fn(it) for it in items]

    def check_conservation(self, I_g: ScalarField2D) -> None:
        I_o = itf.complementary_interferogram(I_g)
        self.record_conservation(I_g.values, I_o.values)

    def record_conservation(self, i_g, i_o) -> None:
        err = float(np.abs(np.asarray(i_g) + np.asarray(i_o) - 1.0).max())
        with self._lock:
            self.conservation_error = max(self.conservation_error, err)

    def write(self, fld: ScalarField2D, name: str) -> None:
        for fmt in self.cfg.formats:
            path = self.out / f"{self.prefix}_{name}.{fmt}"
            (io.write_pgm if fmt == "pgm" else io.write_csv)(fld, path)
            self.files.append(path)

    def write_table(self, name: str, header, columns) -> None:
        path = self.out / f"{self.prefix}_{name}.csv"
        io.write_table_csv(path, header, columns)
        self.files.append(path)

    def detector_image(self, I: ScalarField2D, stream: int) -> ScalarField2D:
        return itf.apply_noise(itf.bin_to_detector(I, self.detector), self.detector, stream)

    def pattern_stats(self, thickness: ScalarField2D, spp, I_det: ScalarField2D) -> dict:
        """Winding of the phase and maxima count on a circle at half the plate radius."""
        r = 0.5 * spp.radius
        center = (spp.center_x, spp.center_z)
        w = itf.winding_along_circle(itf.phase_map(thickness, self.d_lambda), r, center)
        return {
            "winding_number": w.winding_number,
            "smooth_winding": w.smooth,
            "phase_discontinuity": w.has_discontinuity,
            "azimuthal_maxima": oam.count_azimuthal_maxima(I_det, r, center),
            "intensity_min": float(I_det.values.min()),
            "intensity_max": float(I_det.values.max()),
        }


def _tag(x: float) -> str:
    return f"{x:g}".replace("-", "m").replace(".", "p")


def _seam_mask(grid: Grid, spp, band_px: float = 2.0) -> np.ndarray:
    X, Z = grid.mesh()
    return (np.abs(Z - spp.center_z) <= band_px * grid.dz) & (X >= spp.center_x)


def _spp_map(ctx: _Context) -> list:
    radon = ctx.cfg.radon.get("enabled", False)
    rows = []
    for i, spec in enumerate(ctx.cfg.spps):
        spp = ctx.spp(spec)
        direct = geometry.thickness_map_direct(spp, ctx.grid)
        name = f"spp{i}_L{_tag(ctx.effective_L(spp))}"
        ctx.write(ScalarField2D(ctx.grid, direct.values / ctx.d_lambda, Unit.DIMENSIONLESS), name + "_direct")
        row = {"index": i, "L": ctx.effective_L(spp), "step_height_m": spp.step_height_hs,
               "max_thickness_over_d_lambda": float(direct.values.max() / ctx.d_lambda)}
        if radon:
            cfg = geometry.RadonConfig(sampling_p=ctx.cfg.radon.get("sampling_p"))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ResolutionWarning)
                rt = geometry.thickness_map_radon(spp, ctx.grid, cfg)
            ctx.write(ScalarField2D(ctx.grid, rt.values / ctx.d_lambda, Unit.DIMENSIONLESS), name + "_radon")
            keep = ~_seam_mask(ctx.grid, spp)
            diff = (rt.values - direct.values)[keep]
            row["radon_rms_over_step"] = float(np.sqrt(np.mean(diff**2)) / abs(spp.step_height_hs)) \
                if spp.step_height_hs else float(np.sqrt(np.mean(diff**2)))
        rows.append(row)
    return rows


def _interferogram(ctx: _Context) -> list:
    items = [(i, spec, phi0) for i, spec in enumerate(ctx.cfg.spps) for phi0 in ctx.cfg.phi0]

    def one(k_item):
        k, (i, spec, phi0) = k_item
        spp = ctx.spp(spec)
        T = geometry.thickness_map_direct(spp, ctx.grid)
        I = itf.ideal_interferogram(T, ctx.d_lambda, phi0)
        ctx.check_conservation(I)
        I_det = ctx.detector_image(I, stream=k)
        row = {"index": i, "L": ctx.effective_L(spp), "phi0": phi0}
        row.update(ctx.pattern_stats(T, spp, I_det))
        return row, I_det, f"L{_tag(row['L'])}_phi{_tag(phi0)}"

    out = ctx.map(one, list(enumerate(items)))
    for row, img, name in out:
        ctx.write(img, name)
    return [r for r, _, _ in out]


def _stack(ctx: _Context) -> list:
    items = [(i, st, phi0) for i, st in enumerate(ctx.cfg.stacks) for phi0 in ctx.cfg.phi0]

    def one(k_item):
        k, (i, st, phi0) = k_item
        plates = [ctx.spp(s) for s in st]
        T = geometry.stack_thickness([geometry.thickness_map_direct(p, ctx.grid) for p in plates])
        I = itf.ideal_interferogram(T, ctx.d_lambda, phi0)
        ctx.check_conservation(I)
        I_det = ctx.detector_image(I, stream=k)
        Ls = [ctx.effective_L(p) for p in plates]
        row = {"index": i, "L_plates": Ls, "L_total": float(sum(Ls)), "phi0": phi0}
        row.update(ctx.pattern_stats(T, plates[0], I_det))
        return row, I_det, "stack_" + "_".join(_tag(x) for x in Ls) + f"_phi{_tag(phi0)}"

    out = ctx.map(one, list(enumerate(items)))
    for row, img, name in out:
        ctx.write(img, name)
    return [r for r, _, _ in out]


def _flag_series(ctx: _Context) -> list:
    spp = ctx.spp(ctx.cfg.spps[0])
    T = geometry.thickness_map_direct(spp, ctx.grid)
    D0 = ctx.cfg.flag.get("thickness", 1e-3)
    theta_b = ctx.cfg.flag.get("bragg_angle", materials.bragg_angle(ctx.beam))
    rots = ctx.cfg.flag.get("rotations_deg", [0.0])
    phi_base = ctx.cfg.phi0[0]

    def one(k_rot):
        k, deg = k_rot
        flag = geometry.PhaseFlag(D0, np.radians(deg), theta_b)
        dD = geometry.flag_delta_thickness(flag)
        total = geometry.stack_thickness([T, geometry.uniform_thickness(ctx.grid, dD)])
        I = itf.ideal_interferogram(total, ctx.d_lambda, phi_base)
        ctx.check_conservation(I)
        I_det = ctx.detector_image(I, stream=k)
        row = {"rotation_deg": deg, "delta_D_m": dD, "delta_D_over_d_lambda": dD / ctx.d_lambda,
               "flag_phase_rad": geometry.flag_phase(flag, ctx.d_lambda), "L": ctx.effective_L(spp)}
        row.update(ctx.pattern_stats(total, spp, I_det))
        return row, I_det, f"L{_tag(row['L'])}_rot{_tag(deg)}deg"

    out = ctx.map(one, list(enumerate(rots)))
    for row, img, name in out:
        ctx.write(img, name)
    rows = [r for r, _, _ in out]
    ctx.write_table("delta_D", ["rotation_deg", "rotation_rad", "delta_D_m", "delta_D_over_d_lambda", "phase_rad"],
                    [[r["rotation_deg"] for r in rows], np.radians([r["rotation_deg"] for r in rows]),
                     [r["delta_D_m"] for r in rows], [r["delta_D_over_d_lambda"] for r in rows],
                     [r["flag_phase_rad"] for r in rows]])
    return rows


def _coherence(ctx: _Context) -> list:
    coh = itf.CoherenceModel(**{k: v for k, v in ctx.cfg.coherence.items() if k in ("sigma_x", "sigma_z")})
    rows = []
    for i, spec in enumerate(ctx.cfg.spps):
        spp = ctx.spp(spec)
        T = geometry.thickness_map_direct(spp, ctx.grid)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ResolutionWarning)
            V = itf.visibility_map(itf.phase_map(T, ctx.d_lambda), coh)
            I_c = itf.coherent_interferogram(T, ctx.d_lambda, ctx.cfg.phi0[0], coh)
        I_0 = itf.ideal_interferogram(T, ctx.d_lambda, ctx.cfg.phi0[0])
        ctx.check_conservation(I_c)
        name = f"L{_tag(ctx.effective_L(spp))}"
        ctx.write(V, name + "_visibility")
        ctx.write(I_c, name + "_coherent")
        rows.append({"index": i, "L": ctx.effective_L(spp), "sigma_x": coh.sigma_x, "sigma_z": coh.sigma_z,
                     "coherence_resolved": not any(issubclass(w.category, ResolutionWarning) for w in caught),
                     "visibility_min": float(V.values.min()),
                     "max_deviation_from_ideal": float(np.abs(I_c.values - I_0.values).max())})
    return rows


def _borrmann(ctx: _Context) -> list:
    A = float(ctx.cfg.crystal.get("A", 10.0))
    n = int(ctx.cfg.crystal.get("n_gamma", 201))
    theta_b = ctx.cfg.crystal.get("bragg_angle", materials.bragg_angle(ctx.beam))
    crystal = dyndiff.LaueCrystal(theta_b, A)
    gam = np.linspace(-1.0, 1.0, n + 2)[1:-1]
    prof = np.array(ctx.map(lambda g: dyndiff.fan_profile(crystal, [g])[0], list(gam)))
    ref = dyndiff.fan_profile_bessel(crystal, gam)
    ctx.write_table("fan_profile", ["gamma", "intensity", "bessel_closed_form"], [gam, prof, ref])
    y = np.linspace(-10.0, 10.0, 401)
    i_g, i_o = dyndiff.rocking_curve(crystal, y)
    ctx.record_conservation(i_g, i_o)
    ctx.write_table("rocking_curve", ["y", "I_G", "I_O"], [y, i_g, i_o])
    # Gauss-Legendre nodes reach the fan edges, which a uniform grid clips
    x, w = np.polynomial.legendre.leggauss(160)
    flux = float(np.dot(w, ctx.map(lambda g: dyndiff.fan_profile(crystal, [g])[0], list(x))))
    return [{"A": A, "bragg_angle": theta_b, "n_gamma": n,
             "max_abs_error_vs_closed_form": float(np.abs(prof - ref).max()),
             "fan_flux": flux, "integrated_reflectivity": dyndiff.integrated_reflectivity(crystal)}]


def _oam_ring(ctx: _Context) -> list:
    ls = ctx.cfg.oam.get("l_values", [1, 2, 3, 4])
    R = ctx.cfg.oam.get("ring_radius", 4e-3)
    W = ctx.cfg.oam.get("ring_width", 1e-3)
    phase = ctx.cfg.oam.get("relative_phase", 0.0)
    rows = []
    for l in ls:
        I = oam.superposition_intensity(oam.OamSuperposition(l, R, W, phase), ctx.grid)
        ctx.check_conservation(I)
        ctx.write(I, f"l{l}")
        rows.append({"l": l, "azimuthal_maxima": oam.count_azimuthal_maxima(I, R), "expected": 2 * l})
    return rows


def _deflection(ctx: _Context) -> list:
    spp = ctx.spp(ctx.cfg.spps[0])
    r_in = ctx.cfg.deflection.get("inner_cutoff", 0.5e-3)
    r = ctx.cfg.deflection.get("radius", spp.radius)
    radii = np.linspace(r_in, spp.radius, 50)
    defl = [materials.prism_deflection(spp, ctx.material, ctx.beam, x) for x in radii]
    ctx.write_table("deflection_vs_radius", ["radius_m", "deflection_rad"], [radii, defl])
    return [{"L": ctx.effective_L(spp),
             "refractive_decrement": materials.refractive_decrement(ctx.material, ctx.beam),
             "radius_m": r,
             "deflection_rad": materials.prism_deflection(spp, ctx.material, ctx.beam, r),
             "inner_cutoff_m": r_in,
             "mean_deflection_rad": materials.mean_prism_deflection(spp, ctx.material, ctx.beam, r_in)}]


_RUNNERS = {
    "spp-map": _spp_map,
    "interferogram": _interferogram,
    "stack": _stack,
    "flag-series": _flag_series,
    "coherence": _coherence,
    "borrmann": _borrmann,
    "oam-ring": _oam_ring,
    "deflection": _deflection,
}


def resolve_output_dir(cfg: RunConfig) -> Path:
    return Path(cfg.output_dir or os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR)


def run(cfg: RunConfig, jobs: int = 1) -> RunResult:
    """Run one experiment, writing its files and a ``summary.json``.

    Outputs depend only on the configuration (including the seed), not on
    ``jobs``: every series item draws noise from its own RNG stream.
    """
    validate(cfg)
    out = resolve_output_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    ctx = _Context(cfg, out, max(1, int(jobs)))
    items = _RUNNERS[cfg.experiment](ctx)
    summary = {
        "experiment": cfg.experiment,
        "label": ctx.prefix,
        "material": ctx.material.name,
        "wavelength_m": cfg.wavelength,
        "d_lambda_m": ctx.d_lambda,
        "seed": cfg.seed,
        "conservation_max_error": ctx.conservation_error,
        "items": items,
        "files": [p.name for p in ctx.files],
    }
    path = out / f"{ctx.prefix}_summary.json"
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    ctx.files.append(path)
    return RunResult(files=list(ctx.files), summary=summary)
