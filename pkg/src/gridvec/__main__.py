from gridvec.cli import main

main()
