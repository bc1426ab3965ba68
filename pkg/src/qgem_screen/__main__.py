from qgem_screen.cli import main

main()
