#include <iostream>
using namespace std;

int main() {
    volatile unsigned long long spin = 0;
    while (true) {
        spin = spin + 1;
    }
    cout << "done" << endl;
    return 0;
}
