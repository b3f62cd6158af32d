# app/core/checkpoint.py
"""FsiState snapshots: one compressed npz archive with a JSON metadata entry."""
import json
from pathlib import Path
from typing import Optional

import numpy as np

from app.core.errors import ConfigError
from app.models.fields import Pair, ScalarField, TimeTrack, VectorField
from app.models.geometry import ChannelGeometry, DomainTag
from app.models.states import DensityTrack, FsiState, KinematicTrack, WaveRun
from app.utils.logging_config import logger

METADATA_KEY = "metadata"
SLABS = ("lower", "upper")


def _pack(state: FsiState) -> dict:
    arrays = {}
    for slab, v, density in zip(SLABS, state.v.both(), state.density.both()):
        arrays[f"v_{slab}"] = v.values
        arrays[f"R_{slab}"] = density.R.values
        arrays[f"R0_{slab}"] = density.R0.values
    if state.kinematics is not None:
        for slab, kin in zip(SLABS, state.kinematics.both()):
            arrays[f"eta_{slab}"] = kin.eta.values
            arrays[f"a_{slab}"] = kin.a.values
            arrays[f"J_{slab}"] = kin.J.values
    wave = state.wave
    arrays.update(w0=wave.w0.values, w1=wave.w1.values, w=wave.w.values, w_t=wave.w_t.values,
                  energy=wave.energy)
    for slab, psi, dnu in zip(SLABS, wave.psi.both(), wave.normal_derivative.both()):
        arrays[f"psi_{slab}"] = psi.values
        arrays[f"dnu_{slab}"] = dnu.values
    return arrays


def save_checkpoint(state: FsiState, path, seed: Optional[int] = None, window: Optional[dict] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    metadata = {
        "geometry": state.geometry.model_dump(),
        "dt": state.dt,
        "mode": state.mode,
        "seed": seed,
        "window": window or {},
        "has_kinematics": state.kinematics is not None,
        "tags": {
            "v": [t.tag.value for t in state.v.both()],
            "psi": [t.tag.value for t in state.wave.psi.both()],
        },
    }
    arrays = _pack(state)
    arrays[METADATA_KEY] = np.array(json.dumps(metadata, sort_keys=True))
    with path.open("wb") as handle:
        np.savez_compressed(handle, **arrays)
    logger.info(f"Checkpoint written to {path}")
    return path


def load_checkpoint(path) -> tuple[FsiState, dict]:
    """Rebuild the FsiState and return it with the stored metadata."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"checkpoint not found: {path}")
    with np.load(path, allow_pickle=False) as archive:
        arrays = {key: archive[key] for key in archive.files}
    metadata = json.loads(str(arrays.pop(METADATA_KEY)))
    geometry = ChannelGeometry(**metadata["geometry"])
    dt = metadata["dt"]
    v_tags = [DomainTag(tag) for tag in metadata["tags"]["v"]]
    psi_tags = [DomainTag(tag) for tag in metadata["tags"]["psi"]]

    def track(tag, rank, values):
        return TimeTrack(geometry=geometry, tag=tag, rank=rank, dt=dt, values=values)

    v, density, kinematics, psi, dnu = [], [], [], [], []
    for slab, tag, plane in zip(SLABS, v_tags, psi_tags):
        v.append(track(tag, 1, arrays[f"v_{slab}"]))
        density.append(DensityTrack(R=track(tag, 0, arrays[f"R_{slab}"]),
                                    R0=ScalarField(geometry=geometry, tag=tag, values=arrays[f"R0_{slab}"])))
        if metadata["has_kinematics"]:
            kinematics.append(KinematicTrack(eta=track(tag, 1, arrays[f"eta_{slab}"]),
                                             a=track(tag, 2, arrays[f"a_{slab}"]),
                                             J=track(tag, 0, arrays[f"J_{slab}"])))
        psi.append(track(plane, 1, arrays[f"psi_{slab}"]))
        dnu.append(track(plane, 1, arrays[f"dnu_{slab}"]))

    elastic = DomainTag.ELASTIC
    wave = WaveRun(w0=VectorField(geometry=geometry, tag=elastic, values=arrays["w0"]),
                   w1=VectorField(geometry=geometry, tag=elastic, values=arrays["w1"]),
                   psi=Pair(lower=psi[0], upper=psi[1]),
                   w=track(elastic, 1, arrays["w"]), w_t=track(elastic, 1, arrays["w_t"]),
                   normal_derivative=Pair(lower=dnu[0], upper=dnu[1]), energy=arrays["energy"])
    state = FsiState(mode=metadata["mode"], v=Pair(lower=v[0], upper=v[1]),
                     density=Pair(lower=density[0], upper=density[1]), wave=wave,
                     kinematics=Pair(lower=kinematics[0], upper=kinematics[1]) if kinematics else None)
    logger.info(f"Checkpoint loaded from {path}")
    return state, metadata