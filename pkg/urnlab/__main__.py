from urnlab.cli import main

main()
