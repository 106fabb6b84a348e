import n2sid.utility.batch_evaluation as utils_batch
import n2sid.utility.logger as util_logger
from n2sid.data_structure.configuration import N2SIDConfiguration


def main():
    config = N2SIDConfiguration.load("./../config_files/closed_loop_study.yaml")
    util_logger.initialize_logger(config)
    config.print_configuration_summary()

    # both methods identify second-order models; the eigenvalue clouds are drawn against the plant
    report = utils_batch.run_closed_loop_study(config, verbose=True)
    paths = utils_batch.save_study(report, config.general.path_output)
    summary = report.summary()
    print(
        f"mean eigenvalue distance N2SID {summary['n2sid_mean_dispersion']:.4f}, "
        f"N4SID {summary['n4sid_mean_dispersion']:.4f}"
    )
    print(f"figures: {paths.get('N2SID_eigenvalues')}, {paths.get('N4SID_eigenvalues')}")


if __name__ == "__main__":
    main()
