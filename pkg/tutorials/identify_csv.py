import n2sid.utility.general as utils_gen
import n2sid.utility.logger as util_logger
from n2sid.data_structure.configuration import N2SIDConfiguration
from n2sid.data_structure.n2sid_interface import N2SIDInterface
from n2sid.identification import N2SID, N4SID


def main():
    config = N2SIDConfiguration()
    config.general.set_run_name("second_order_noise_free")
    config.identification.s = 10
    config.identification.lambda_count = 8
    util_logger.initialize_logger(config)
    config.print_configuration_summary()

    io = utils_gen.read_io_csv("./../example_data/second_order_noise_free.csv")
    interface = N2SIDInterface(config)
    interface.identify(io, [N2SID, N4SID])
    # models, report and the singular value figures
    paths = interface.save_to_file(config.general.path_output)
    print(paths)


if __name__ == "__main__":
    main()
