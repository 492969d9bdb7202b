#include "critmax/family.hpp"
int main(){ return 0; }
