import time

import n2sid.utility.batch_evaluation as utils_batch
import n2sid.utility.logger as util_logger
from n2sid.data_structure.configuration import N2SIDConfiguration
from n2sid.data_structure.type import TypeStudy


def main():
    config = N2SIDConfiguration.load("./../config_files/open_loop_study.yaml")
    util_logger.initialize_logger(config)
    config.print_configuration_summary()

    start = time.time()
    print("Testing run_parallel()...")
    report = utils_batch.run_study(config, TypeStudy.OPEN_LOOP, trials=20)
    end_par = time.time()
    print("Testing run_sequential()...")
    config.bench.num_worker = 1
    report_seq = utils_batch.run_study(config, TypeStudy.OPEN_LOOP, trials=20)
    end_seq = time.time()
    par_t = end_par - start
    seq_t = end_seq - end_par

    print("Time used for the open-loop study:")
    print("=========================")
    print(f"Par: {par_t} s.")
    print(f"Seq: {seq_t} s.")
    print(f"Speedup: {seq_t / par_t}.")
    print(f"Identical reports: {report.digest() == report_seq.digest()}")

    utils_batch.save_study(report, config.general.path_output)
    print(report.summary())


if __name__ == "__main__":
    main()
