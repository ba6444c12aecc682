from translab.cli import main

main()
