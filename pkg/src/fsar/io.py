"""File formats for the command line tools.

Numeric files are plain CSV without headers; lines starting with ``#``
are comments.  Scenario configs are flat ``key = value`` files where
``rho_true`` may be a comma separated list, in which case the file
expands to one scenario per value with everything else shared.
"""

import hashlib
import json
from importlib import resources

import numpy as np

from .basis import Grid
from .sim import ScenarioConfig

_INT_KEYS = frozenset({"seed", "n_areas", "basis_k", "knn_k", "replicates", "grid_points"})
_FLOAT_KEYS = frozenset({
    "sigma2_true", "beta_noise_var", "gp_length_scale", "gp_variance",
    "trend_amplitude", "trend_frequency", "grid_start", "grid_stop",
})
_GRID_KEYS = ("grid_start", "grid_stop", "grid_points")


def read_matrix_csv(path):
    try:
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except (ValueError, OSError) as exc:
        raise ValueError(f"could not read numeric CSV from {path}: {exc}") from exc
    return data


def read_vector_csv(path):
    data = read_matrix_csv(path)
    if 1 not in data.shape:
        raise ValueError(f"{path} must hold a single row or column")
    return data.reshape(-1)


def read_grid_csv(path):
    return Grid.from_points(read_vector_csv(path))


def read_edges_csv(path, n=None):
    """Undirected edge list to a symmetric adjacency matrix.

    Rows are ``i,j`` or ``i,j,weight`` with 0-based region indices.  The
    region count defaults to one past the largest index seen.
    """
    rows = read_matrix_csv(path)
    if rows.shape[1] not in (2, 3):
        raise ValueError(f"{path} must have 2 or 3 columns (i, j[, weight])")
    i = rows[:, 0]
    j = rows[:, 1]
    if not (np.all(i == np.round(i)) and np.all(j == np.round(j))):
        raise ValueError("edge endpoints must be integers")
    i = i.astype(int)
    j = j.astype(int)
    if np.any(i < 0) or np.any(j < 0):
        raise ValueError("edge endpoints must be non-negative")
    if np.any(i == j):
        raise ValueError("self loops are not allowed in an edge list")
    inferred = int(max(i.max(), j.max())) + 1
    if n is None:
        n = inferred
    elif n < inferred:
        raise ValueError(f"edge list references region {inferred - 1} but n={n}")
    weights = rows[:, 2] if rows.shape[1] == 3 else np.ones(rows.shape[0])
    if np.any(weights <= 0):
        raise ValueError("edge weights must be positive")
    adj = np.zeros((n, n))
    adj[i, j] = weights
    adj[j, i] = weights
    return adj


def bundled_config_text(name):
    """Text of a config shipped inside the package, e.g. ``table1``."""
    ref = resources.files("fsar").joinpath(f"configs/{name}.cfg")
    if not ref.is_file():
        raise ValueError(f"no bundled config named {name!r}")
    return ref.read_text(encoding="utf-8")


def parse_scenario_config(text, source="config"):
    """Parse ``key = value`` lines into a list of scenario configs."""
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key in pairs:
            raise ValueError(f"{source}:{lineno}: duplicate key {key!r}")
        pairs[key] = (lineno, value)

    def take(key, cast):
        lineno, value = pairs.pop(key)
        try:
            return cast(value)
        except ValueError as exc:
            raise ValueError(f"{source}:{lineno}: bad value for {key}: {exc}") from exc

    if "seed" not in pairs:
        raise ValueError(f"{source}: config must set seed")
    rhos = [0.5]
    if "rho_true" in pairs:
        lineno, value = pairs.pop("rho_true")
        try:
            rhos = [float(part) for part in value.split(",") if part.strip()]
        except ValueError as exc:
            raise ValueError(f"{source}:{lineno}: bad rho_true list: {exc}") from exc
        if not rhos:
            raise ValueError(f"{source}:{lineno}: rho_true list is empty")
    kwargs = {}
    grid_parts = {}
    for key in list(pairs):
        if key in _INT_KEYS:
            value = take(key, int)
        elif key in _FLOAT_KEYS:
            value = take(key, float)
        else:
            lineno, _ = pairs[key]
            raise ValueError(f"{source}:{lineno}: unknown key {key!r}")
        if key in _GRID_KEYS:
            grid_parts[key] = value
        else:
            kwargs[key] = value
    if grid_parts:
        missing = [key for key in _GRID_KEYS if key not in grid_parts]
        if missing:
            raise ValueError(f"{source}: a custom grid needs {', '.join(_GRID_KEYS)}")
        kwargs["grid"] = Grid.uniform(
            grid_parts["grid_start"], grid_parts["grid_stop"], grid_parts["grid_points"]
        )
    return [ScenarioConfig(rho_true=rho, **kwargs) for rho in rhos]


def load_scenario_configs(name_or_path):
    """Load scenarios from a file path or a bundled config name."""
    try:
        with open(name_or_path, "r", encoding="utf-8") as fh:
            return parse_scenario_config(fh.read(), source=str(name_or_path))
    except (FileNotFoundError, IsADirectoryError):
        pass
    return parse_scenario_config(
        bundled_config_text(name_or_path), source=f"bundled:{name_or_path}"
    )


def write_matrix_csv(path, matrix, header=None):
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    np.savetxt(path, matrix, delimiter=",", fmt="%.17g",
               header=header or "", comments="# " if header else "# ")


def write_band_csv(path, band):
    data = np.column_stack([band.grid.points, band.center, band.lower, band.upper])
    write_matrix_csv(path, data, header="t,center,lower,upper")


def write_summary_csv(path, summaries):
    # first four columns follow the study table layout: rho, rho_hat,
    # MISE, sigma2_hat; the remaining columns are diagnostics
    rows = [
        (s.rho_true, s.rho_hat_mean, s.mise, s.sigma2_hat_mean,
         s.rho_hat_sd, float(s.replicates_converged), float(s.replicates))
        for s in summaries
    ]
    write_matrix_csv(
        path, np.array(rows),
        header="rho_true,rho_hat_mean,mise,sigma2_hat_mean,rho_hat_sd,"
               "replicates_converged,replicates",
    )


def write_report(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def sha256_digest(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()
