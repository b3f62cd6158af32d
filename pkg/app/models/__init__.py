from .geometry import ChannelGeometry, DomainTag, build_geometry
from .fields import Pair, ScalarField, TensorField, TimeTrack, VectorField
from .states import CouplingData, DensityTrack, ElasticState, FsiState, KinematicTrack, LameProblem, Viscosities, WaveRun
