from .artifacts import input_hash, output_directory, write_json, write_table
from .convergence import observed_order, pairwise_orders
from .manufactured import build_coupling_data, compatible_data, random_data, trivial_data
