import numpy as np
import pytest

SUMMARY_HEADER = (
    "nu,step_size_factor,status,rvite,rvite_warning,"
    "mean_energy,mean_pressure,wall_seconds,speedup"
)


def write_lines(path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join([header] + [",".join(str(v) for v in row) for row in rows]) + "\n")


@pytest.fixture
def experiment_dir(tmp_path):
    """A handcrafted single-nu experiment tree with runs for s = 1, 2, 12."""
    rng = np.random.default_rng(5)
    summary_rows = []
    for s, wall in ((1, 100.0), (2, 55.0), (12, 12.0)):
        sub = tmp_path / f"nu0.3_s{s}"
        iterations = np.arange(0, 121, 12)
        total = -16637.88 + rng.normal(0.0, 0.05, size=len(iterations)) + 0.01 * s
        write_lines(
            sub / "energies.csv",
            "iteration,kinetic,potential_2b,potential_3b,total",
            [
                (it, 1.0, -2.0, 0.5, t)
                for it, t in zip(iterations, total)
            ],
        )
        write_lines(
            sub / "pressure.csv",
            "iteration,pressure",
            [(it, 3.0 + 0.1 * s + 0.01 * k) for k, it in enumerate(iterations)],
        )
        r = np.linspace(0.02, 4.0, 100)
        g = 1.0 + np.exp(-((r - 1.1) ** 2) / 0.02) * (2.0 + 0.05 * s)
        write_lines(sub / "rdf.csv", "r,g", list(zip(r, g)))
        summary_rows.append(
            (0.3, s, "ok", 1e-6 * s, "", -16637.88, 3.0, wall, 100.0 / wall)
        )
    # a pure two-body companion run for the rdf overlay
    sub = tmp_path / "nu0.0_s1"
    r = np.linspace(0.02, 4.0, 100)
    g = 1.0 + np.exp(-((r - 1.15) ** 2) / 0.02) * 2.4
    write_lines(sub / "rdf.csv", "r,g", list(zip(r, g)))
    write_lines(
        sub / "pressure.csv", "iteration,pressure", [(0, 2.0), (12, 2.1)]
    )
    write_lines(
        sub / "energies.csv",
        "iteration,kinetic,potential_2b,potential_3b,total",
        [(0, 1.0, -2.0, 0.0, -16000.0)],
    )
    summary_rows.append((0.0, 1, "ok", 2e-6, "", -16000.0, 2.0, 8.0, 1.0))
    write_lines(tmp_path / "summary.csv", SUMMARY_HEADER, summary_rows)
    return tmp_path


@pytest.fixture
def single_nu_dir(experiment_dir, tmp_path_factory):
    """The same tree restricted to its nu=0.3 runs (for the histogram kinds)."""
    target = tmp_path_factory.mktemp("single")
    for sub in experiment_dir.iterdir():
        if sub.is_dir() and sub.name.startswith("nu0.3_"):
            dest = target / sub.name
            dest.mkdir()
            for f in sub.iterdir():
                (dest / f.name).write_bytes(f.read_bytes())
    (target / "summary.csv").write_text(
        "\n".join(
            line
            for line in (experiment_dir / "summary.csv").read_text().splitlines()
            if not line.startswith("0.0,")
        )
        + "\n"
    )
    return target
