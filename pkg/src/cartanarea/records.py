"""Structured-text records: graph files, element records, CSV output."""

import json

import numpy as np

from .extremal import GridGraph, grid_axes

GRID_FORMAT = "cartan-grid/1"


def fmt(v) -> str:
    """Floating-point text with 17 significant digits (round-trip exact)."""
    return f"{float(v):.17g}"


def graph_to_dict(graph: GridGraph) -> dict:
    return {
        "format": GRID_FORMAT,
        "n": graph.n,
        "p": graph.p,
        "domain": [[lo, hi] for lo, hi in graph.domain],
        "resolution": list(graph.resolution),
        "values": graph.values.tolist(),
    }


def graph_from_dict(record: dict) -> GridGraph:
    if record.get("format") != GRID_FORMAT:
        raise ValueError(
            f"unsupported graph format {record.get('format')!r}; expected {GRID_FORMAT!r}"
        )
    n, p = int(record["n"]), int(record["p"])
    values = np.asarray(record["values"], dtype=float)
    return GridGraph(
        p=p,
        codim=n - p,
        domain=tuple((lo, hi) for lo, hi in record["domain"]),
        resolution=tuple(record["resolution"]),
        values=values,
        boundary_data=values.copy(),
    )


def write_graph(path, graph: GridGraph):
    with open(path, "w") as fh:
        json.dump(graph_to_dict(graph), fh)
        fh.write("\n")


def read_graph(path) -> GridGraph:
    with open(path) as fh:
        return graph_from_dict(json.load(fh))


def graph_csv_lines(graph: GridGraph):
    """Point-cloud CSV: one row per node, base coordinates then values."""
    header = [f"x{j + 1}" for j in range(graph.p)] + [
        f"f{i + 1}" for i in range(graph.codim)
    ]
    yield ",".join(header)
    axes = grid_axes(graph.domain, graph.resolution)
    for idx in np.ndindex(*graph.resolution):
        coords = [axes[k][idx[k]] for k in range(graph.p)]
        row = [fmt(c) for c in coords] + [fmt(v) for v in graph.values[idx]]
        yield ",".join(row)


def matrix_lines(mat):
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    for row in mat:
        yield " ".join(fmt(v) for v in row)


def parse_vectors(text: str) -> np.ndarray:
    """Parse 'a b; c d' into a row-per-vector array."""
    rows = [r.strip() for r in text.replace("\n", ";").split(";") if r.strip()]
    return np.array([[float(tok) for tok in r.replace(",", " ").split()] for r in rows])
