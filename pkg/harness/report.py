import polars as pl

from inverse.structures import StructureCertificate
from mathutil.rationals import format_rational


def certificate_frame(
    cert: StructureCertificate, probabilities: dict | None = None
) -> pl.DataFrame:
    """One row per surviving row: the combined-row coefficients and the probability."""
    rows = [
        {
            "row": i,
            "k": cert.k,
            "pivot_coefficients": ", ".join(
                f"{c} * row {p}"
                for c, p in zip(cert.row_coeffs[i], cert.pivot_rows, strict=True)
            ),
            "probability": (
                None if probabilities is None else format_rational(probabilities[i])
            ),
        }
        for i in cert.surviving
    ]
    return pl.DataFrame(
        rows,
        schema={
            "row": pl.Int64,
            "k": pl.Int64,
            "pivot_coefficients": pl.String,
            "probability": pl.String,
        },
    )


def print_certificate(cert: StructureCertificate, probabilities: dict | None = None):
    print(f"k = {cert.k}, pivots = {list(cert.pivot_rows)}, C = {cert.bound_exponent}")
    frame = certificate_frame(cert, probabilities)
    if probabilities is None:
        frame = frame.drop("probability")
    with pl.Config(tbl_rows=-1, fmt_str_lengths=80):
        print(frame)
