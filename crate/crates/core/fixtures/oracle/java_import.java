import java.util.Scanner;
import org.apache.commons.lang3.math.NumberUtils;

public class Main {
    public static void main(String[] args) {
        Scanner sc = new Scanner(System.in);
        long a = NumberUtils.toLong(sc.next());
        long b = NumberUtils.toLong(sc.next());
        System.out.println(a + b);
    }
}
