from .simulate import simulate_command
from .lemmas import verify_lemmas_command
from .compat import check_compat_command
from .contraction import contraction_study_command
from .mms import mms_command
from .run import print_defaults_command, run_command
