from .gate import RunningMean, p_at, should_continue
from .progressive import StageResult, build_search_net, evaluate_stage1, evaluate_stage2, flags_from_settings, search_loss_spec
from .search_log import SearchLog, controller_path, top_k
from .search_engine import SearchEngine, SearchResult, run_search
from .full_train import AUX_ARMS, FullTrainResult, full_train, load_trained, save_trained, stage_schedule, train_arms, write_rows_csv
from .ablation import SETUPS, AblationResult, ComponentTest, run_ablation, sign_test
