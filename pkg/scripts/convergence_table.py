"""Relative error of each KG closed form against the direct sum, mubar in [0.3, 20]."""
import numpy as np

from relthermo.partition import Variant, direct_sum, kg_closed_partition
from relthermo.spectra import KgLinear

if __name__ == "__main__":
    print(f"{'mubar':>8} {'Z_direct':>16} {'err published':>14} {'err rederived':>14}")
    for m in np.geomspace(0.3, 20, 15):
        ref = direct_sum(KgLinear(), m).z
        errs = [abs(kg_closed_partition(m, v).z - ref) / ref for v in (Variant.PUBLISHED, Variant.REDERIVED)]
        print(f"{m:8.4f} {ref:16.10f} {errs[0]:14.3e} {errs[1]:14.3e}")
